// cli.hpp
//
//   fgf_cli simulate  run experiments, write report_<model>_<order>.csv + summary.csv
//   fgf_cli density   grid joint and conditional densities, density_<model>.csv
//   fgf_cli kl        KL objective per feature order, kl_<model>.csv
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
#pragma once

#include <ostream>

namespace fgf {

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fgf
