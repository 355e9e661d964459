#include "fairres/numfmt.hpp"

#include <charconv>

namespace fairres {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace fairres
