#include <benchmark/benchmark.h>

#include "ctp/log.hpp"

int main(int argc, char** argv) {
  // Warnings repeat on every iteration and drown the report.
  ctp::log::set_level(ctp::log::Level::Off);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
