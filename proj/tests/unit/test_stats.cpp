#include <doctest.h>

#include "fisheyegt/image_io.hpp"
#include "fisheyegt/stats.hpp"
#include "stats_fixture.hpp"
#include "test_util.hpp"

using namespace fisheyegt;

TEST_CASE("pixel histogram") {
  ClassHistogram h;
  h.add(Raster8::labels(4, 4, 7));
  CHECK(h.percent(7) == 100.0);
  h.add(Raster8::labels(4, 4, 24));
  CHECK(h.percent(7) == 50.0);
  CHECK(h.percent(24) == 50.0);
  CHECK(h.percent(99) == 0.0);

  Raster8 mixed = Raster8::labels(3, 1);
  mixed.at(0, 0) = kNoLabel;
  mixed.at(1, 0) = 200;
  mixed.at(2, 0) = 4;
  ClassHistogram m;
  m.add(mixed);
  CHECK(m.total() == 2);
  CHECK(m.unknown == 1);
  CHECK(m.counts[0] == 1);
  CHECK(ClassHistogram{}.percent(3) == 0.0);

  // Colour rasters count their first channel.
  Raster8 rgb(2, 1, 3);
  rgb.at(0, 0, 0) = 8;
  rgb.at(1, 0, 0) = 8;
  rgb.at(1, 0, 1) = 3;
  ClassHistogram c;
  c.add(rgb);
  CHECK(c.counts[8] == 2);
}

TEST_CASE("histogram percentages sum to 100") {
  testutil::Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    ClassHistogram total;
    const int rasters = rng.integer(1, 5);
    for (int r = 0; r < rasters; ++r) {
      Raster8 img = Raster8::labels(rng.integer(1, 40), rng.integer(1, 40));
      const int spread = rng.integer(1, 255);
      for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.integer(0, spread));
      ClassHistogram one;
      one.add(img);
      total.merge(one);
    }
    if (total.total() == 0) continue;
    double sum = 0.0;
    for (int k = 0; k < kClassCount; ++k) sum += total.percent(k);
    CHECK(std::abs(sum - 100.0) <= 1e-6);
  }
}

TEST_CASE("histogram from label files") {
  testutil::TempDir dir;
  Raster8 a = Raster8::labels(10, 10, 7);
  Raster8 b = Raster8::labels(10, 10, 1);
  write_palette_png(dir / "a.png", a, label_palette());
  write_png(dir / "b.png", b);
  const std::vector<std::filesystem::path> files = {dir / "a.png", dir / "b.png"};
  const auto h = class_pixel_histogram(files);
  CHECK(h.percent(7) == 50.0);
  CHECK(h.percent(1) == 50.0);
  const std::string csv = histogram_csv(h);
  CHECK(csv.find("class_id,name,pixels,percent\n0,unlabeled,0,0.000000\n1,building,100,50.000000\n") == 0);
  const auto j = histogram_to_json(h);
  CHECK(j.at("total_pixels") == 200);
  CHECK(j.at("classes").size() == static_cast<std::size_t>(kClassCount));
}

TEST_CASE("object statistics on the hand-counted frames") {
  const auto frames = testutil::hand_stats_frames();
  const auto want = testutil::hand_stats_expected();
  const ObjectStats s = object_statistics(frames);
  REQUIRE(s.classes.size() == 3);
  CHECK(s.frames == 4);
  CHECK(s.classes[0].cls == SemanticClass::pedestrian);
  CHECK(s.classes[1].cls == SemanticClass::four_wheeler);
  CHECK(s.classes[2].cls == SemanticClass::two_wheeler);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(s.percent_of_images(c) == want.percent[c]);
    CHECK(s.objects_per_image(c) == want.per_image[c]);
    for (std::size_t t = 0; t < 5; ++t) CHECK(s.moving_per_image(c, t) == want.moving[c][t]);
  }

  const std::string table = format_object_table(s);
  const std::string expected =
      "                     |         All objects         | Moving objects (threshold, m)\n"
      "Class                |  % of images  objects/image |   0.00   0.25   0.50   0.75   1.00\n"
      "---------------------------------------------------------------------------------------\n"
      "Pedestrian           |        75.00           1.00 |   0.75   0.50   0.00   0.00   0.00\n"
      "Four-wheeler vehicle |        75.00           1.00 |   0.50   0.50   0.50   0.50   0.25\n"
      "Two-wheeler vehicle  |        50.00           0.50 |   0.50   0.50   0.50   0.50   0.00\n";
  CHECK(table == expected);

  const auto j = object_stats_to_json(s);
  CHECK(j.at("frames") == 4);
  CHECK(j.at("classes")[1].at("moving")[4].at("objects") == 1);
}

TEST_CASE("static pedestrians") {
  std::vector<FrameObjects> frames(3);
  for (auto& f : frames) {
    for (ObjectId id : {1u, 2u}) {
      f.boxes.push_back({OrientedBox3D(id, static_cast<std::uint8_t>(SemanticClass::pedestrian), Vec3::Zero(), Vec3::Ones()), true});
      f.motions.push_back({id, 0.0});
    }
  }
  const auto s = object_statistics(frames);
  CHECK(s.percent_of_images(0) == 100.0);
  CHECK(s.objects_per_image(0) == 2.0);
  for (std::size_t t = 0; t < 5; ++t) CHECK(s.moving_per_image(0, t) == 0.0);
  CHECK(object_statistics(std::vector<FrameObjects>{}).percent_of_images(0) == 0.0);
}

TEST_CASE("moving counts never grow with the threshold") {
  testutil::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<FrameObjects> frames(rng.integer(1, 6));
    for (auto& f : frames) {
      const int n = rng.integer(0, 8);
      for (int k = 0; k < n; ++k) {
        const auto id = static_cast<ObjectId>(k + 1);
        const std::uint8_t cls = std::array<std::uint8_t, 4>{4, 10, 21, 8}[rng.integer(0, 3)];
        f.boxes.push_back({OrientedBox3D(id, cls, Vec3::Zero(), Vec3::Ones()), true});
        if (rng.coin()) f.motions.push_back({id, rng.coin() ? 0.25 * rng.integer(0, 5) : rng.uniform(0, 2)});
        if (rng.integer(0, 9) == 0) f.spawned.insert(id);
      }
    }
    std::vector<double> th;
    for (int k = 0; k < 6; ++k) th.push_back(rng.uniform(0, 2));
    std::sort(th.begin(), th.end());
    const auto s = object_statistics(frames, th);
    for (const auto& cs : s.classes) {
      CHECK(std::is_sorted(cs.moving.rbegin(), cs.moving.rend()));
      CHECK(cs.moving.front() <= cs.objects);
      CHECK(cs.frames_with <= frames.size());
    }
  }
}
