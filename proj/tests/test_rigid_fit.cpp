#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "slipsense/rigid_fit.hpp"
#include "slipsense/simulator.hpp"
#include "support/oracles.hpp"

using namespace slipsense;

namespace {

DisplacementField make_field(const std::vector<Vec2>& ref, const std::vector<Vec2>& cur) {
  DisplacementField f;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    DisplacementEntry e;
    e.marker_id = static_cast<int>(i) + 1;
    e.ref_pos = ref[i];
    e.cur_pos = cur[i];
    e.disp = cur[i] - ref[i];
    e.in_contact = true;
    e.inner = true;
    f.entries.push_back(e);
  }
  return f;
}

InnerSelection all_inner(const DisplacementField& f) {
  InnerSelection sel;
  Vec2 c{0, 0};
  for (const auto& e : f.entries) {
    sel.inner_ids.push_back(e.marker_id);
    c += e.ref_pos;
  }
  if (!f.entries.empty()) sel.centroid = c / static_cast<double>(f.entries.size());
  return sel;
}

std::vector<Vec2> random_cloud(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ux(5.0, 35.0), uy(5.0, 25.0);
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i) out.emplace_back(ux(rng), uy(rng));
  return out;
}

std::vector<Vec2> rotate_about(const std::vector<Vec2>& pts, const Vec2& pivot, double theta,
                               const Vec2& t) {
  const double c = std::cos(theta), s = std::sin(theta);
  std::vector<Vec2> out;
  for (const Vec2& p : pts) {
    const Vec2 d = p - pivot;
    out.push_back(pivot + Vec2(c * d.x() - s * d.y(), s * d.x() + c * d.y()) + t);
  }
  return out;
}

}  // namespace

TEST_CASE("inner selection erodes the contact boundary") {
  SensorGeometry geom;
  GelModel model;
  const Vec2 center(20, 15);
  ContactMask mask(geom.width_px, geom.height_px);
  const Vec2 c_px = geom.mm_to_px(center);
  const double r_px = 10.0 / geom.sx();
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (std::hypot(x - c_px.x(), y - c_px.y()) <= r_px) mask.at(x, y) = 1;

  const auto grid = marker_grid(model);
  std::vector<Vec2> same = grid;
  DisplacementField field = make_field(grid, same);
  for (auto& e : field.entries) e.inner = false;
  InnerSelection sel = select_inner(field, mask, geom, 3.0);

  // Grid distances from (20,15) jump from 6.708 to 7.5 mm, so the 7 mm rim
  // is unambiguous even with pixel quantization.
  std::vector<int> want;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if ((grid[i] - center).norm() < 7.0) want.push_back(static_cast<int>(i) + 1);
  auto got = sel.inner_ids;
  std::sort(got.begin(), got.end());
  CHECK(got == want);

  for (const auto& e : field.entries) {
    const bool inside = std::binary_search(want.begin(), want.end(), e.marker_id);
    CHECK(e.inner == inside);
  }

  Vec2 c{0, 0};
  for (int id : want) c += grid[id - 1];
  c /= static_cast<double>(want.size());
  CHECK((sel.centroid - c).norm() < 1e-12);
}

TEST_CASE("erosion of a thin strip empties the selection") {
  SensorGeometry geom;
  ContactMask mask(geom.width_px, geom.height_px);
  for (int y = 200; y < 264; ++y)  // 64 px = 4 mm < 2 * 3 mm erosion
    for (int x = 0; x < mask.width; ++x) mask.at(x, y) = 1;
  GelModel model;
  const auto grid = marker_grid(model);
  DisplacementField field = make_field(grid, grid);
  InnerSelection sel = select_inner(field, mask, geom, 3.0);
  CHECK(sel.inner_ids.empty());
}

TEST_CASE("zero erosion keeps every in-contact marker") {
  SensorGeometry geom;
  GelModel model;
  ContactMask full(geom.width_px, geom.height_px, 1);
  const auto grid = marker_grid(model);
  DisplacementField field = make_field(grid, grid);
  field.entries[3].in_contact = false;  // excluded regardless of the mask
  InnerSelection sel = select_inner(field, full, geom, 0.0);
  CHECK(sel.inner_ids.size() == grid.size() - 1);
  CHECK(!std::count(sel.inner_ids.begin(), sel.inner_ids.end(), 4));
}

TEST_CASE("pure translation is recovered exactly") {
  std::mt19937_64 rng(31);
  const auto ref = random_cloud(rng, 30);
  std::vector<Vec2> cur;
  for (const Vec2& p : ref) cur.push_back(p + Vec2(0.4, 0));
  DisplacementField f = make_field(ref, cur);
  auto fit = fit_rigid(f, all_inner(f));
  REQUIRE(fit.has_value());
  CHECK((fit->motion.linear_velocity - Vec2(0.4, 0)).norm() < 1e-12);
  CHECK(std::abs(fit->motion.angular_velocity) < 1e-12);
  CHECK(fit->rms_residual < 1e-12);
  CHECK(fit->n_points == 30);
}

TEST_CASE("exact rotation about the centroid is recovered exactly") {
  std::mt19937_64 rng(32);
  const auto ref = random_cloud(rng, 25);
  Vec2 c{0, 0};
  for (const Vec2& p : ref) c += p;
  c /= 25.0;
  const auto cur = rotate_about(ref, c, 0.02, Vec2(0, 0));
  DisplacementField f = make_field(ref, cur);
  auto fit = fit_rigid(f, all_inner(f));
  REQUIRE(fit.has_value());
  CHECK(std::abs(fit->motion.angular_velocity - 0.02) < 1e-9);
  CHECK(fit->motion.linear_velocity.norm() < 1e-9);
}

TEST_CASE("noisy fits match the brute-force oracle") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> uth(-0.1, 0.1), ut(-0.5, 0.5);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int it = 0; it < 25; ++it) {
    const auto ref = random_cloud(rng, 50);
    const Vec2 pivot = ref[it % ref.size()];
    auto cur = rotate_about(ref, pivot, uth(rng), Vec2(ut(rng), ut(rng)));
    for (Vec2& p : cur) p += Vec2(noise(rng), noise(rng));

    DisplacementField f = make_field(ref, cur);
    auto fit = fit_rigid(f, all_inner(f));
    REQUIRE(fit.has_value());
    auto want = oracle::fit_rigid_bruteforce(ref, cur);
    CHECK(std::abs(fit->motion.angular_velocity - want.omega) < 1e-4);
    CHECK((fit->motion.ref_point - want.ref_point).norm() < 1e-4);
    CHECK((fit->motion.linear_velocity - want.linear).norm() < 1e-4);
  }
}

TEST_CASE("noiseless fits match the oracle to high precision") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> uth(-0.1, 0.1), ut(-0.5, 0.5);
  for (int it = 0; it < 10; ++it) {
    const auto ref = random_cloud(rng, 50);
    const auto cur = rotate_about(ref, ref[2 * it % ref.size()], uth(rng), Vec2(ut(rng), ut(rng)));
    DisplacementField f = make_field(ref, cur);
    auto fit = fit_rigid(f, all_inner(f));
    REQUIRE(fit.has_value());
    auto want = oracle::fit_rigid_bruteforce(ref, cur);
    CHECK(std::abs(fit->motion.angular_velocity - want.omega) < 1e-9);
    CHECK((fit->motion.linear_velocity - want.linear).norm() < 1e-9);
  }
}

TEST_CASE("small-rate linear fields are recovered within the cubic error term") {
  // The closed-form angle is atan-like on linearized fields, so exactness
  // holds when omega^3 terms sit below the tolerance.
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> uv(-0.5, 0.5);
  for (double w : {1e-4, 5e-4, 1e-3}) {
    const auto ref = random_cloud(rng, 40);
    const RigidMotion2d m{Vec2(20, 15), Vec2(uv(rng), uv(rng)), w};
    std::vector<Vec2> cur;
    for (const Vec2& p : ref) cur.push_back(apply_motion(m, p));
    DisplacementField f = make_field(ref, cur);
    auto fit = fit_rigid(f, all_inner(f));
    REQUIRE(fit.has_value());
    CHECK(std::abs(fit->motion.angular_velocity - w) < 1e-9);
    CHECK(fit->rms_residual < 1e-7);
  }
}

TEST_CASE("fitted parameters sit at a local energy minimum") {
  std::mt19937_64 rng(36);
  std::normal_distribution<double> noise(0.0, 0.02);
  const auto ref = random_cloud(rng, 50);
  auto cur = rotate_about(ref, Vec2(18, 12), 0.015, Vec2(0.3, -0.1));
  for (Vec2& p : cur) p += Vec2(noise(rng), noise(rng));
  DisplacementField f = make_field(ref, cur);
  auto fit = fit_rigid(f, all_inner(f));
  REQUIRE(fit.has_value());

  Vec2 ca{0, 0};
  for (const Vec2& p : ref) ca += p;
  ca /= static_cast<double>(ref.size());
  auto energy = [&](double th, const Vec2& t) {
    double e = 0;
    const double c = std::cos(th), s = std::sin(th);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const Vec2 d = ref[i] - ca;
      const Vec2 pred = ca + Vec2(c * d.x() - s * d.y(), s * d.x() + c * d.y()) + t;
      e += (cur[i] - pred).squaredNorm();
    }
    return e;
  };
  const double th = fit->motion.angular_velocity;
  const Vec2 t = fit->motion.linear_velocity;
  const double base = energy(th, t);
  for (double d : {-1e-3, 1e-3}) {
    CHECK(energy(th + d, t) >= base - 1e-12);
    CHECK(energy(th, t + Vec2(d, 0)) >= base - 1e-12);
    CHECK(energy(th, t + Vec2(0, d)) >= base - 1e-12);
  }
}

TEST_CASE("translating both frames shifts only the reference point") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> noise(0.0, 0.01);
  const auto ref = random_cloud(rng, 30);
  auto cur = rotate_about(ref, Vec2(20, 10), 0.01, Vec2(0.2, 0.1));
  for (Vec2& p : cur) p += Vec2(noise(rng), noise(rng));
  DisplacementField f0 = make_field(ref, cur);
  auto fit0 = fit_rigid(f0, all_inner(f0));
  REQUIRE(fit0.has_value());

  const Vec2 off(1.25, -2.5);
  std::vector<Vec2> ref2, cur2;
  for (const Vec2& p : ref) ref2.push_back(p + off);
  for (const Vec2& p : cur) cur2.push_back(p + off);
  DisplacementField f1 = make_field(ref2, cur2);
  auto fit1 = fit_rigid(f1, all_inner(f1));
  REQUIRE(fit1.has_value());

  CHECK((fit1->motion.ref_point - fit0->motion.ref_point - off).norm() < 1e-12);
  CHECK((fit1->motion.linear_velocity - fit0->motion.linear_velocity).norm() < 1e-12);
  CHECK(std::abs(fit1->motion.angular_velocity - fit0->motion.angular_velocity) < 1e-12);
}

TEST_CASE("marker order does not change the fit") {
  std::mt19937_64 rng(38);
  std::normal_distribution<double> noise(0.0, 0.02);
  const auto ref = random_cloud(rng, 40);
  auto cur = rotate_about(ref, Vec2(22, 14), -0.02, Vec2(-0.1, 0.3));
  for (Vec2& p : cur) p += Vec2(noise(rng), noise(rng));
  DisplacementField f = make_field(ref, cur);
  auto base = fit_rigid(f, all_inner(f));
  REQUIRE(base.has_value());

  DisplacementField shuffled = f;
  std::shuffle(shuffled.entries.begin(), shuffled.entries.end(), rng);
  auto again = fit_rigid(shuffled, all_inner(shuffled));
  REQUIRE(again.has_value());
  CHECK(std::abs(base->motion.angular_velocity - again->motion.angular_velocity) < 1e-12);
  CHECK((base->motion.linear_velocity - again->motion.linear_velocity).norm() < 1e-12);
  CHECK((base->motion.ref_point - again->motion.ref_point).norm() < 1e-12);
}

TEST_CASE("degenerate layouts are refused") {
  std::vector<Vec2> line, cur;
  for (int i = 0; i < 10; ++i) {
    line.emplace_back(5.0 + i, 10.0 + 2.0 * i);
    cur.emplace_back(5.4 + i, 10.0 + 2.0 * i);
  }
  DisplacementField f = make_field(line, cur);
  CHECK_FALSE(fit_rigid(f, all_inner(f)).has_value());
}

TEST_CASE("spread agrees with the closed-form singular value") {
  CHECK(observability_spread({Vec2(0, 0), Vec2(1, 2), Vec2(2, 4)}) < 1e-12);
  CHECK(observability_spread({Vec2(3, 3), Vec2(3, 3), Vec2(3, 3), Vec2(3, 3), Vec2(3, 3)}) <
        1e-12);
  CHECK(std::abs(observability_spread(
                     {Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(0.5, 0.5), Vec2(-0.5, 0.5)}) -
                 1.0) < 1e-12);

  std::mt19937_64 rng(39);
  for (int it = 0; it < 20; ++it) {
    const auto pts = random_cloud(rng, 3 + it);
    CHECK(std::abs(observability_spread(pts) - oracle::second_singular_value(pts)) < 1e-9);
  }
}
