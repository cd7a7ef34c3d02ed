// Copyright 2026 The crowdpush Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Renders a small synthetic crowd scene and runs the full pipeline on it.
//
// usage: synthetic_pipeline_demo [out_dir]

#include <filesystem>
#include <iostream>

#include "crowdpush/cli.hpp"
#include "support/synthetic_scene.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "crowdpush_demo";
  fs::remove_all(root);
  const auto scene = crowdpush::testing::write_synthetic_scene(root / "scene");

  std::vector<std::string> args{"crowdpush", "pipeline", "--frames-dir", scene.frames_dir.string(), "--config",
                                scene.config.string(), "--trajectories"};
  for (std::size_t i = 0; i < scene.video_ids.size(); ++i)
    args.push_back(scene.video_ids[i] + "=" + scene.trajectories[i].string());
  args.push_back("--ground-truth");
  for (std::size_t i = 0; i < scene.video_ids.size(); ++i)
    args.push_back(scene.video_ids[i] + "=" + scene.ground_truth[i].string());
  for (const char* a : {"--holdout-video", "v3", "--seed", "42", "--out"}) args.emplace_back(a);
  args.push_back((root / "run").string());

  std::vector<const char*> argv_out;
  for (const auto& a : args) argv_out.push_back(a.c_str());
  const int code = crowdpush::cli::run(static_cast<int>(argv_out.size()), argv_out.data());
  if (code == 0) std::cout << "outputs in " << (root / "run").string() << "\n";
  return code;
}
