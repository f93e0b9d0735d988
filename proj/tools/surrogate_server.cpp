// Serves a built-in model over the simulator line protocol on stdin/stdout.
// Usage: surrogate_server MODEL [PARAM...]

#include "falsify/error.hpp"
#include "falsify/models.hpp"

#include <fmt/format.h>

#include <iostream>

using namespace falsify;

int main(int argc, char **argv) {
  if (argc < 2) {
    fmt::print(stderr, "usage: {} MODEL [PARAM...]\n", argv[0]);
    return 1;
  }
  try {
    const auto model = make_builtin_model(argv[1], std::vector<std::string>(argv + 2, argv + argc));
    while (auto request = read_request(std::cin)) {
      write_response(std::cout, model->simulate(request->input, request->step));
      std::cout.flush();
    }
  } catch (const std::exception &e) {
    fmt::print(stderr, "{}\n", e.what());
    return 2;
  }
  return 0;
}
