#include <iostream>
#include <string>
#include <vector>

#include "consent_audit/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return consent_audit::RunCli(args, std::cout, std::cerr);
}
