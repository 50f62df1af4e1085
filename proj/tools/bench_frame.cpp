// Per-frame latency of the capture pipeline on a synthetic 1920x1080 frame:
// segmentation, geometry, four fingerprint renders and quality, one thread.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "touchprint/pipeline.hpp"
#include "touchprint/synthetic.hpp"

using namespace touchprint;

int main(int argc, char** argv) {
  CLI::App app{"Frame pipeline latency benchmark"};
  int runs = 10, width = 1920, height = 1080;
  std::uint64_t seed = 1;
  app.add_option("--runs", runs, "Timed repetitions")->check(CLI::PositiveNumber);
  app.add_option("--width", width, "Frame width");
  app.add_option("--height", height, "Frame height");
  app.add_option("--seed", seed, "Frame generator seed");
  CLI11_PARSE(app, argc, argv);

  synth::Rng rng(seed);
  const auto frame = synth::make_hand_frame(synth::capture_hand_spec(HandSide::Right, width, height), rng).image;

  process_hand(frame, HandSide::Right);  // warm caches
  std::vector<double> ms;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto samples = process_hand(frame, HandSide::Right);
    const auto t1 = std::chrono::steady_clock::now();
    if (samples.size() != 4) return 1;
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  std::cout << nlohmann::json{{"width", width},
                              {"height", height},
                              {"runs", runs},
                              {"median_ms", ms[ms.size() / 2]},
                              {"min_ms", ms.front()},
                              {"max_ms", ms.back()}}
                   .dump()
            << '\n';
  return 0;
}
