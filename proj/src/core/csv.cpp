#include "dmc/core/csv.hpp"

#include <charconv>
#include <ostream>

namespace dmc {

void write_number(std::ostream& os, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, ptr - buf);
}

}  // namespace dmc
