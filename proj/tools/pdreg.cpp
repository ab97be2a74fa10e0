#include "pdreg/cli.hpp"

int main(int argc, char** argv)
{
  return pdreg::cli::run(argc, argv);
}
