// libFuzzer entry point: each input is decoded into an event sequence for the
// model named by CONSTABL_FUZZ_MODEL and checked with every default oracle.
// Any defect aborts so the fuzzer records the input.

#include <cstdlib>
#include <iostream>

#include "constabl/fuzz.hpp"

namespace {

std::shared_ptr<const constabl::Program> program() {
  static std::shared_ptr<const constabl::Program> p = [] {
    const char* path = std::getenv("CONSTABL_FUZZ_MODEL");
    if (!path) {
      std::cerr << "set CONSTABL_FUZZ_MODEL to a .cstl file\n";
      std::abort();
    }
    return constabl::load_program(path);
  }();
  return p;
}

}  // namespace

extern "C" int LLVMFuzzerTestOneInput(const std::uint8_t* data, std::size_t size) {
  auto p = program();
  constabl::Witness w;
  w.events = constabl::events_from_bytes(p->model(), std::vector<std::uint8_t>(data, data + size));
  constabl::RunReport rep = constabl::run_witness(p, w, constabl::FuzzConfig{});
  for (const auto& f : rep.findings) {
    std::cerr << constabl::describe(f) << "\n";
    std::abort();
  }
  return 0;
}
