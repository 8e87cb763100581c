#include "gsp/spectral.hpp"

#include <charconv>

namespace gsp {

namespace {

double parse_parameter(const std::string& text, std::size_t colon) {
  if (colon == std::string::npos)
    throw Error(Errc::ConfigInvalid, "filter '" + text + "' needs a numeric parameter");
  double value = 0.0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw Error(Errc::ConfigInvalid, "filter '" + text + "' needs a numeric parameter");
  return value;
}

}  // namespace

FilterSpec parse_filter(const std::string& text) {
  if (text == "identity") return identity_filter();
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  if (family == "lowpass") {
    auto spec = lowpass_filter(parse_parameter(text, colon));
    spec.name = text;
    return spec;
  }
  if (family == "heat") {
    const double t = parse_parameter(text, colon);
    return {text, [t](double x) { return std::exp(-t * x); }};
  }
  throw Error(Errc::ConfigInvalid, "unknown filter '" + text + "' (expected lowpass:C, heat:T or identity)");
}

}  // namespace gsp
