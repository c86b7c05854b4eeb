// Writes the deterministic multi-camera fixture dataset.

#include <CLI11.hpp>

#include <iostream>

#include "fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic cubemap dataset generator", "fisheyegt-synth"};
  std::string output;
  fisheyegt::synth::FixtureOptions options;
  app.add_option("output", output, "Dataset root to create")->required();
  app.add_option("--scale", options.scale, "Lens scale relative to 1280x966")->check(CLI::PositiveNumber);
  app.add_option("--face-size", options.face_size, "Cubemap face side, 0 = 1280 * scale")->check(CLI::NonNegativeNumber);
  app.add_option("--frames", options.frames, "Number of frames")->check(CLI::Range(1, 100000));
  CLI11_PARSE(app, argc, argv);
  try {
    fisheyegt::synth::write_fixture(output, options);
  } catch (const std::exception& e) {
    std::cerr << "fisheyegt-synth: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
