#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kronsensus/group.hpp"

namespace kronsensus {

class UsageError : public Error {
 public:
  using Error::Error;
};

/// "0:0.3334,1:0.3333,-1:0.3333", "(0,1):0.5,(0,0):0.5", "uniform:-1,0,1" or
/// "uniform:(0,0),(1,0),(0,1)". UsageError unless the weights sum to 1.
Generator parse_generator(const std::string& text, const AbelianGroup& group);

/// args excludes the program name. Returns 0 on success, 1 on a validation
/// failure, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kronsensus
