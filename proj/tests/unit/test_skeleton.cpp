#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "coupdate/bow.hpp"
#include "coupdate/skeleton.hpp"

using namespace coupdate;

namespace {

using Mat3 = std::array<Vec3, 3>;

Vec3 rotate_by(const Mat3& r, const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i) out[i] = r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
    return out;
}

Mat3 random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
    const double len = std::sqrt(w * w + x * x + y * y + z * z);
    w /= len, x /= len, y /= len, z /= len;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

Vec3 unit(Vec3 v) {
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / len, v[1] / len, v[2] / len};
}

Skeleton random_skeleton(std::mt19937_64& rng, std::size_t joints = 25) {
    std::normal_distribution<double> n(0.0, 1.0);
    Skeleton s;
    for (std::size_t i = 0; i < joints; ++i) {
        Joint j;
        j.position = {n(rng), n(rng), n(rng)};
        j.orientation = unit({n(rng), n(rng), n(rng)});
        s.joints.push_back(j);
    }
    return s;
}

// Angle through atan2 of the cross and dot products, independent of acos.
double oracle_angle(const Vec3& u, const Vec3& v) {
    const Vec3 c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    return std::atan2(std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]), u[0] * v[0] + u[1] * v[1] + u[2] * v[2]);
}

Vec3 minus(const Vec3& p, const Vec3& q) { return {p[0] - q[0], p[1] - q[1], p[2] - q[2]}; }

AngleConfig default_config() { return load_angle_config(COUPDATE_CONFIG_DIR "/upper_body_angles.txt"); }

}  // namespace

TEST_CASE("angle_between basics") {
    const Vec3 ex{1, 0, 0}, ey{0, 1, 0};
    CHECK(angle_between(ex, ex) == 0.0);
    CHECK(std::abs(angle_between(ex, ey) - M_PI / 2) <= 1e-15);
    CHECK(std::abs(angle_between(ex, {-1, 0, 0}) - M_PI) <= 1e-15);
    CHECK(std::abs(angle_between({2, 0, 0}, {0, 0, 5}) - M_PI / 2) <= 1e-15);
    // nearly parallel inputs whose rounded cosine exceeds one
    CHECK(angle_between({0.1, 0.2, 0.3}, {0.1 * 3, 0.2 * 3, 0.3 * 3}) >= 0.0);
    CHECK_THROWS_AS(angle_between({0, 0, 0}, ex), ValidationError);
}

TEST_CASE("theta, phi and alpha on hand-built skeletons") {
    Skeleton s;
    s.joints = {{{0, 0, 0}, Vec3{0, 1, 0}}, {{1, 0, 0}, Vec3{0, 1, 0}}, {{0, 2, 0}, Vec3{1, 0, 0}},
                {{3, 0, 0}, std::nullopt}};
    CHECK(theta_angle(s, {0, 1}) == 0.0);
    CHECK(std::abs(theta_angle(s, {0, 2}) - M_PI / 2) <= 1e-15);
    CHECK(std::abs(phi_angle(s, {0, 1}) - M_PI / 2) <= 1e-15);
    CHECK(phi_angle(s, {0, 2}) == 0.0);
    CHECK(alpha_angle(s, {1, 0, 3}) == 0.0);
    CHECK(std::abs(alpha_angle(s, {1, 0, 2}) - M_PI / 2) <= 1e-15);

    CHECK_THROWS_AS(theta_angle(s, {0, 3}), ValidationError);
    Skeleton same = s;
    same.joints[1].position = same.joints[0].position;
    CHECK_THROWS_AS(phi_angle(same, {0, 1}), ValidationError);
    CHECK_THROWS_AS(alpha_angle(same, {1, 0, 2}), ValidationError);
    CHECK_THROWS_AS(theta_angle(s, {0, 9}), ValidationError);
}

TEST_CASE("angles agree with an independent oracle") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::size_t> pick(0, 24);
    for (int t = 0; t < 1000; ++t) {
        const Skeleton s = random_skeleton(rng);
        const std::size_t a = pick(rng), b = (a + 1 + pick(rng) % 24) % 25, c = (b + 1 + pick(rng) % 23) % 25;
        const auto& J = s.joints;
        CHECK(std::abs(theta_angle(s, {a, b}) - oracle_angle(*J[a].orientation, *J[b].orientation)) <= 1e-9);
        CHECK(std::abs(phi_angle(s, {a, b}) - oracle_angle(*J[a].orientation, minus(J[b].position, J[a].position))) <=
              1e-9);
        if (c != a) {
            CHECK(std::abs(alpha_angle(s, {b, a, c}) -
                           oracle_angle(minus(J[b].position, J[a].position), minus(J[c].position, J[a].position))) <=
                  1e-9);
        }
    }
}

TEST_CASE("default angle set gives 28 values in range") {
    const AngleConfig cfg = default_config();
    CHECK(cfg.theta.size() == 8);
    CHECK(cfg.phi.size() == 16);
    CHECK(cfg.alpha.size() == 4);
    std::mt19937_64 rng(13);
    for (int t = 0; t < 50; ++t) {
        const Features v = frame_vector(random_skeleton(rng), cfg);
        REQUIRE(v.size() == 28);
        for (double x : v) {
            CHECK(x >= 0.0);
            CHECK(x <= M_PI);
        }
    }
    CHECK_THROWS_AS(frame_vector(random_skeleton(rng, 10), cfg), ValidationError);
}

TEST_CASE("permuting the angle set permutes the frame vector") {
    AngleConfig cfg = default_config();
    std::mt19937_64 rng(14);
    const Skeleton s = random_skeleton(rng);
    const Features base = frame_vector(s, cfg);
    AngleConfig rev = cfg;
    std::reverse(rev.theta.begin(), rev.theta.end());
    std::reverse(rev.phi.begin(), rev.phi.end());
    std::reverse(rev.alpha.begin(), rev.alpha.end());
    const Features r = frame_vector(s, rev);
    for (std::size_t i = 0; i < 8; ++i) CHECK(r[i] == base[7 - i]);
    for (std::size_t i = 0; i < 16; ++i) CHECK(r[8 + i] == base[8 + 15 - i]);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r[24 + i] == base[24 + 3 - i]);
}

TEST_CASE("frame vector is invariant to rigid rotation") {
    const AngleConfig cfg = default_config();
    std::mt19937_64 rng(15);
    std::normal_distribution<double> n(0.0, 1.0);
    const Skeleton s = random_skeleton(rng);
    const Features base = frame_vector(s, cfg);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Mat3 r = random_rotation(rng);
        const Vec3 shift{n(rng), n(rng), n(rng)};
        Skeleton moved = s;
        for (auto& j : moved.joints) {
            const Vec3 p = rotate_by(r, j.position);
            j.position = {p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]};
            j.orientation = rotate_by(r, *j.orientation);
        }
        const Features v = frame_vector(moved, cfg);
        for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v[i] - base[i]));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("frame vector is invariant to uniform scaling of positions") {
    const AngleConfig cfg = default_config();
    std::mt19937_64 rng(16);
    const Skeleton s = random_skeleton(rng);
    const Features base = frame_vector(s, cfg);
    for (double k : {0.01, 0.5, 3.0, 250.0}) {
        const Vec3 centre{0.3, -1.0, 2.0};
        Skeleton scaled = s;
        for (auto& j : scaled.joints) {
            for (int i = 0; i < 3; ++i) j.position[i] = centre[i] + k * (j.position[i] - centre[i]);
        }
        const Features v = frame_vector(scaled, cfg);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - base[i]) <= 1e-9);
    }
}

TEST_CASE("quaternion to direction") {
    const Vec3 id = quaternion_direction(1, 0, 0, 0);
    CHECK(id == Vec3{0, 1, 0});
    // 90 degrees about z takes y to -x
    const double h = std::sqrt(0.5);
    const Vec3 r = quaternion_direction(h, 0, 0, h);
    CHECK(std::abs(r[0] + 1.0) <= 1e-15);
    CHECK(std::abs(r[1]) <= 1e-15);
    CHECK(std::abs(r[2]) <= 1e-15);
    // unnormalized input is normalized first
    const Vec3 r2 = quaternion_direction(2 * h, 0, 0, 2 * h);
    CHECK(std::abs(r2[0] + 1.0) <= 1e-15);
    CHECK_THROWS_AS(quaternion_direction(0, 0, 0, 0), ValidationError);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const Vec3 d = quaternion_direction(n(rng), n(rng), n(rng), n(rng), {1, 0, 0});
        CHECK(std::abs(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - 1.0) <= 1e-12);
    }
}

TEST_CASE("angle set parsing") {
    std::istringstream good("# comment\ntheta 0 1\n\nphi 2 3 # trailing\nalpha 4 5 6\n");
    const AngleConfig cfg = parse_angle_config(good);
    CHECK(cfg.size() == 3);
    CHECK(cfg.alpha[0].b == 4);
    CHECK(cfg.alpha[0].a == 5);
    CHECK(cfg.alpha[0].c == 6);

    for (const char* bad : {"theta 1\n", "alpha 1 2\n", "beta 1 2\n", "phi 1 x\n", "theta -1 2\n"}) {
        std::istringstream in(bad);
        CHECK_THROWS_AS(parse_angle_config(in), ValidationError);
    }
    CHECK_THROWS_AS(load_angle_config("/nonexistent/angles.txt"), ValidationError);
}

TEST_CASE("skeleton stream round trip") {
    std::mt19937_64 rng(18);
    std::vector<Skeleton> frames{random_skeleton(rng, 4), random_skeleton(rng, 4)};
    frames[1].joints[3].orientation.reset();
    std::stringstream ss;
    write_skeleton_stream(ss, frames);
    const auto back = read_skeleton_stream(ss);
    REQUIRE(back.size() == 2);
    for (std::size_t f = 0; f < 2; ++f) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(back[f].joints[j].position == frames[f].joints[j].position);
            CHECK(back[f].joints[j].orientation == frames[f].joints[j].orientation);
        }
    }
    std::istringstream not_unit(R"({"joints":[[0,0,0,1,1,0]]})");
    CHECK_THROWS_AS(read_skeleton_stream(not_unit), ValidationError);
    std::istringstream short_joint(R"({"joints":[[0,0]]})");
    CHECK_THROWS_AS(read_skeleton_stream(short_joint), ValidationError);
    std::istringstream ragged("{\"joints\":[[0,0,0]]}\n{\"joints\":[[0,0,0],[1,1,1]]}\n");
    CHECK_THROWS_AS(read_skeleton_stream(ragged), ValidationError);
}

TEST_CASE("skeleton sequence encoding") {
    const AngleConfig cfg = default_config();
    std::mt19937_64 rng(19);
    std::vector<Features> frames;
    for (int t = 0; t < 40; ++t) frames.push_back(frame_vector(random_skeleton(rng), cfg));
    const Codebook book = fit_codebook(frames, 8, 3);
    const Features h = encode_skeleton_sequence(frames, book);
    CHECK(h.size() == 8);
    CHECK(h == encode(frames, book));
    CHECK_THROWS_AS(encode_skeleton_sequence({}, book), ValidationError);
}
