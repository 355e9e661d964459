#pragma once

#include <string>

namespace fairres {

// Locale-independent decimal rendering with 17 significant digits.
std::string format_double(double x);

}  // namespace fairres
