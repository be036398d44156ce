#include "dmc/core/trajectory.hpp"

#include <ostream>

#include "dmc/core/csv.hpp"

namespace dmc {

void Trajectory::write_csv(std::ostream& os, const std::string& prefix) const {
  os << "t";
  for (int i = 1; i <= dim(); ++i) os << ',' << prefix << '_' << i;
  os << '\n';
  for (int k = first_node; k <= last_node(); ++k) {
    write_number(os, grid.time(k));
    for (int i = 0; i < dim(); ++i) {
      os << ',';
      write_number(os, at(k)(i));
    }
    os << '\n';
  }
}

}  // namespace dmc
