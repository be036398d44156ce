#pragma once

#include <iosfwd>

namespace dmc {

/// Writes a double in shortest round-trip form so CSV output is bit-stable.
void write_number(std::ostream& os, double v);

}  // namespace dmc
