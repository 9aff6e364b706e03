#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "berrypick/errors.hpp"
#include "berrypick/filters.hpp"
#include "oracles.hpp"

using namespace berrypick;

namespace {

PointCloud copies(const Vec3 &p, int n) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.push_back({p, std::nullopt, Pixel{i, 0}, 1});
  return c;
}

PointCloud sphere(int n, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    Vec3 d(g(rng), g(rng), g(rng));
    c.points.push_back({radius * d.normalized(), {}, {}, {}});
  }
  return c;
}

} // namespace

TEST_CASE("median filter keeps a constant image") {
  DepthImage d(9, 7, 500);
  CHECK(median_filter(d, 5) == d);
  CHECK(median_filter(median_filter(d, 5), 5) == d);
}

TEST_CASE("median filter outvotes an isolated return") {
  DepthImage d(9, 9, 0);
  d.at(4, 4) = 800;
  const auto out = median_filter(d, 5);
  CHECK(out.at(4, 4) == 0);
  CHECK(std::all_of(out.values.begin(), out.values.end(),
                    [](std::uint16_t v) { return v == 0; }));
}

TEST_CASE("median filter leaves interior rows of a row ramp unchanged") {
  DepthImage d(7, 7);
  for (int v = 0; v < 7; ++v)
    for (int u = 0; u < 7; ++u)
      d.at(u, v) = static_cast<std::uint16_t>(v * 100);
  // Row 0 holds zeros, which are invalid; start the ramp at 100.
  for (auto &x : d.values)
    x = static_cast<std::uint16_t>(x + 100);
  const auto out = median_filter(d, 5);
  for (int v = 2; v < 5; ++v)
    for (int u = 0; u < 7; ++u)
      CHECK(out.at(u, v) == d.at(u, v));
  CHECK(out == oracle::median(d, 5));
}

TEST_CASE("median filter matches the per-pixel oracle and never invents values") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> val(300, 900);
  std::bernoulli_distribution hole(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    DepthImage d(17, 13);
    for (auto &x : d.values)
      x = hole(rng) ? 0 : static_cast<std::uint16_t>(val(rng));
    for (int w : {3, 5, 7}) {
      const auto out = median_filter(d, w);
      CHECK(out == oracle::median(d, w));
      const std::set<std::uint16_t> in(d.values.begin(), d.values.end());
      for (auto x : out.values)
        CHECK(in.count(x) == 1);
    }
  }
}

TEST_CASE("median filter rejects even or tiny windows") {
  DepthImage d(4, 4, 1);
  CHECK_THROWS_AS(median_filter(d, 4), ParameterError);
  CHECK_THROWS_AS(median_filter(d, 1), ParameterError);
}

TEST_CASE("projection through the principal point") {
  DepthImage d(640, 480);
  RgbImage rgb(640, 480);
  d.at(320, 240) = 1000;
  rgb.set(320, 240, {1, 2, 3});
  const auto c = project_point_cloud(rgb, d, CameraIntrinsics{});
  REQUIRE(c.size() == 1);
  CHECK((c[0].position - Vec3(0, 0, 1.0)).norm() < 1e-12);
  CHECK(c[0].color == Rgb{1, 2, 3});
  CHECK(c[0].source_pixel == Pixel{320, 240});
}

TEST_CASE("projection with custom intrinsics") {
  DepthImage d(64, 8);
  RgbImage rgb(64, 8);
  d.at(50, 0) = 2000;
  const auto c = project_point_cloud(rgb, d, CameraIntrinsics{100, 100, 0, 0});
  REQUIRE(c.size() == 1);
  CHECK((c[0].position - Vec3(1.0, 0, 2.0)).norm() < 1e-12);
  CHECK(project_point_cloud(rgb, DepthImage(64, 8), CameraIntrinsics{100, 100, 0, 0})
            .empty());
}

TEST_CASE("projection recovers rendered points within half a pixel") {
  const CameraIntrinsics k;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(-0.06, 0.06), z(0.2, 0.6);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(xy(rng), xy(rng), z(rng));
    const auto uv = k.project(p);
    const int u = static_cast<int>(std::lround(uv.x()));
    const int v = static_cast<int>(std::lround(uv.y()));
    DepthImage d(640, 480);
    d.at(u, v) = static_cast<std::uint16_t>(std::lround(p.z() * 1000));
    const auto c = project_point_cloud(RgbImage(640, 480), d, k);
    REQUIRE(c.size() == 1);
    const double half_pixel = 0.5 * p.z() / k.fx * std::sqrt(2.0);
    const Vec3 e = c[0].position - p;
    CHECK(std::hypot(e.x(), e.y()) <= half_pixel + 0.0005 * 0.2);
    CHECK(std::abs(e.z()) <= 0.0005 + 1e-12);
  }
}

TEST_CASE("voxel downsample of identical points") {
  const auto out = voxel_downsample(copies({0.01, 0.01, 0.01}, 30), {0.005, 30});
  REQUIRE(out.size() == 1);
  CHECK((out[0].position - Vec3(0.01, 0.01, 0.01)).norm() < 1e-15);
  CHECK(voxel_downsample(copies({0.01, 0.01, 0.01}, 29), {0.005, 30}).empty());
}

TEST_CASE("voxel downsample of two clusters") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> in(0.001, 0.049);
  PointCloud c;
  Vec3 sum[2] = {Vec3::Zero(), Vec3::Zero()};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 30; ++i) {
      const Vec3 p(in(rng) + 0.05 * k, in(rng), in(rng));
      sum[k] += p;
      c.points.push_back({p, {}, Pixel{i, k}, k});
    }
  const auto out = voxel_downsample(c, {0.05, 30});
  REQUIRE(out.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK((out[k].position - sum[k] / 30).norm() < 1e-12);
    CHECK(out[k].instance_id == k);
  }
}

TEST_CASE("voxel downsample bounds") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  PointCloud c;
  for (int i = 0; i < 5000; ++i)
    c.points.push_back({Vec3(u(rng), u(rng), u(rng)), {}, Pixel{i % 97, i / 97}, 0});
  const VoxelParams vp{0.02, 3};
  const auto out = voxel_downsample(c, vp);
  std::map<std::array<long, 3>, std::vector<Vec3>> bins;
  for (const auto &p : c.points) {
    const Eigen::Array3d f = (p.position / vp.voxel_size).array().floor();
    bins[{long(f.x()), long(f.y()), long(f.z())}].push_back(p.position);
  }
  CHECK(out.size() <= bins.size());
  CHECK(bins.size() <= c.size());
  std::size_t kept = 0;
  for (const auto &[key, members] : bins) {
    if (members.size() < 3)
      continue;
    ++kept;
    const Vec3 center = (Eigen::Array3d(key[0], key[1], key[2]) + 0.5).matrix() *
                        vp.voxel_size;
    bool found = false;
    for (const auto &q : out.points)
      if ((q.position - center).norm() <= vp.voxel_size * std::sqrt(3.0) / 2 + 1e-12) {
        const Eigen::Array3d f = (q.position / vp.voxel_size).array().floor();
        if (f.x() == key[0] && f.y() == key[1] && f.z() == key[2])
          found = true;
      }
    CHECK(found);
  }
  CHECK(out.size() == kept);
}

TEST_CASE("mask extraction") {
  PointCloud c;
  for (int i = 0; i < 10; ++i)
    c.points.push_back({Vec3(i, 0, 1), {}, Pixel{i, 0}, {}});
  InstanceMask full(10, 1, 3, Ripeness::ripe), none(10, 1, 4, Ripeness::unripe),
      some(10, 1, 5, Ripeness::ripe);
  std::fill(full.bits.begin(), full.bits.end(), 1);
  for (int u : {1, 4, 6, 9})
    some.set(u, 0);
  const auto all = extract_masked(c, full);
  CHECK(all.size() == 10);
  CHECK(all[0].instance_id == 3);
  CHECK(extract_masked(c, none).empty());
  const auto four = extract_masked(c, some);
  REQUIRE(four.size() == 4);
  CHECK(four[0].position.x() == 1);
  CHECK(four[3].position.x() == 9);

  PointCloud bad = c;
  bad.points[2].source_pixel.reset();
  CHECK_THROWS_AS(extract_masked(bad, full), ContractError);
  bad = c;
  bad.points[2].source_pixel = Pixel{20, 0};
  CHECK_THROWS_AS(extract_masked(bad, full), ContractError);
}

TEST_CASE("mask extraction over a partition is disjoint and covering") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> col(0, 31), row(0, 23), lab(0, 3);
  PointCloud c;
  for (int i = 0; i < 400; ++i)
    c.points.push_back({Vec3(i, 0, 1), {}, Pixel{col(rng), row(rng)}, {}});
  std::vector<InstanceMask> masks;
  for (int k = 0; k < 3; ++k)
    masks.emplace_back(32, 24, k, Ripeness::ripe);
  for (int v = 0; v < 24; ++v)
    for (int u = 0; u < 32; ++u) {
      const int l = lab(rng);
      if (l < 3)
        masks[l].set(u, v);
    }
  std::multiset<double> seen;
  std::size_t covered = 0;
  for (const auto &p : c.points)
    for (const auto &m : masks)
      covered += m.test(p.source_pixel->u, p.source_pixel->v);
  for (const auto &m : masks)
    for (const auto &p : extract_masked(c, m).points) {
      CHECK(seen.count(p.position.x()) == 0);
      seen.insert(p.position.x());
    }
  CHECK(seen.size() == covered);
}

TEST_CASE("outlier removal") {
  const auto s = sphere(100, 0.02, 4);
  CHECK(remove_outliers(s, {16, 2.0}).size() >= 98);

  auto with_far = s;
  with_far.points.push_back({Vec3(1.0, 0, 0), {}, {}, {}});
  const auto cleaned = remove_outliers(with_far, {16, 2.0});
  CHECK(std::none_of(cleaned.points.begin(), cleaned.points.end(),
                     [](const Point &p) { return p.position.x() > 0.5; }));

  const auto small = sphere(5, 0.02, 6);
  const auto same = remove_outliers(small, {16, 2.0});
  REQUIRE(same.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(same[i].position == small[i].position);
}

TEST_CASE("outlier removal output is a sub-multiset") {
  auto s = sphere(300, 0.02, 8);
  s.points.push_back(s.points[3]);
  std::multiset<std::array<double, 3>> in;
  for (const auto &p : s.points)
    in.insert({p.position.x(), p.position.y(), p.position.z()});
  for (const auto &p : remove_outliers(s, {8, 1.0}).points) {
    const auto it = in.find({p.position.x(), p.position.y(), p.position.z()});
    REQUIRE(it != in.end());
    in.erase(it);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(voxel_downsample(PointCloud{}, {0.0, 30}), ParameterError);
  CHECK_THROWS_AS(voxel_downsample(PointCloud{}, {0.01, 0}), ParameterError);
  CHECK_THROWS_AS(remove_outliers(PointCloud{}, {0, 2.0}), ParameterError);
  CHECK_THROWS_AS(project_point_cloud(RgbImage(3, 3), DepthImage(4, 4),
                                      CameraIntrinsics{1, 1, 1, 1}),
                  ParameterError);
}
