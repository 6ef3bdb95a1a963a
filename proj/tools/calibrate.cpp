// Re-measures the empirical constants that are frozen in
// include/adgm/recorded_constants.hpp. Run after intentional algorithm
// changes and paste the fresh values into the header.
#include <iostream>

#include "adgm/verify.hpp"

int main() {
  for (const char* suite : {"forms", "interp"}) {
    for (const adgm::CheckResult& r : adgm::run_suite(suite))
      if (r.detail.find("measured=") != std::string::npos)
        std::cout << r.name << "  " << r.detail << "\n";
  }
  return 0;
}
