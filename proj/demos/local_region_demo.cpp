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

// Prints the dummy points, direct neighbors and local region polygon of a
// small hand-made snapshot.

#include <iomanip>
#include <iostream>

#include "crowdpush/crowdpush.hpp"

int main() {
  using namespace crowdpush;
  FrameSnapshot snapshot;
  snapshot.frame = 0;
  const std::vector<Point> people{{0.0, 0.0}, {0.5, 0.5}, {1.4, -0.2}, {-0.8, 0.9}, {0.3, -1.1}};
  for (std::size_t i = 0; i < people.size(); ++i)
    snapshot.pedestrians.push_back({static_cast<std::int64_t>(i + 1), people[i], false});

  const auto augmented = generate_dummy_points(snapshot, 1.0);
  const auto hood = neighborhood_of(augmented);
  const auto ordinals = dummy_ordinals(augmented);

  std::cout << std::fixed << std::setprecision(3);
  std::cout << "dummy points (r = 1):\n";
  for (std::size_t i = 0; i < augmented.pedestrians.size(); ++i)
    if (augmented.pedestrians[i].is_dummy)
      std::cout << "  0." << ordinals[i] << " at (" << augmented.pedestrians[i].position.x << ", "
                << augmented.pedestrians[i].position.y << ")\n";

  std::cout << "\nneighbors:\n" << pipeline::format_neighbors(pipeline::neighbor_rows(augmented, hood.graph));

  for (const auto& p : snapshot.pedestrians) {
    const auto poly = local_region_polygon(p.person_id, augmented, hood.graph);
    std::cout << "\nperson " << p.person_id << " region (" << poly.vertices.size() << " vertices):";
    for (const auto& v : poly.vertices) std::cout << " (" << v.x << ", " << v.y << ")";
  }
  std::cout << "\n";
  return 0;
}
