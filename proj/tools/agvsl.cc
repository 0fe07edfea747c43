#include "agvsl/cli.h"

#include <iostream>

int
main (int argc, char **argv)
{
  return agvsl::CliMain ({argv + 1, argv + argc}, std::cout, std::cerr);
}
