#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memocr::cli {

// Exit codes: 0 ok, 1 runtime failure, 2 usage or unreadable input.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace memocr::cli
