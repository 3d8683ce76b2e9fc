#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "coupdate/types.hpp"

namespace coupdate {

class Codebook;

using Vec3 = std::array<double, 3>;

struct Joint {
    Vec3 position{};
    // Unit direction; joints at the end of a kinematic chain may have none.
    std::optional<Vec3> orientation;
};

struct Skeleton {
    std::vector<Joint> joints;
};

struct JointPair {
    std::size_t a = 0;
    std::size_t b = 0;
};

// alpha angle at vertex `a` between the segments a->b and a->c.
struct JointTriplet {
    std::size_t b = 0;
    std::size_t a = 0;
    std::size_t c = 0;
};

struct AngleConfig {
    std::vector<JointPair> theta;
    std::vector<JointPair> phi;
    std::vector<JointTriplet> alpha;

    std::size_t size() const { return theta.size() + phi.size() + alpha.size(); }
    void validate(std::size_t num_joints) const;
};

// Angle in [0, pi] between two non-zero vectors; the cosine is clamped to
// [-1, 1] before acos.
double angle_between(const Vec3& u, const Vec3& v);

// Angle between the orientations of joints a and b.
double theta_angle(const Skeleton& skeleton, JointPair pair);
// Angle between the orientation of a and the bone a->b.
double phi_angle(const Skeleton& skeleton, JointPair pair);
// Angle at a between the bones a->b and a->c.
double alpha_angle(const Skeleton& skeleton, JointTriplet triplet);

// (theta_1..theta_m, phi_1..phi_n, alpha_1..alpha_s), in config order.
Features frame_vector(const Skeleton& skeleton, const AngleConfig& config);

// L1-normalised histogram of posture codewords over a sequence's frame vectors.
Features encode_skeleton_sequence(std::span<const Features> frames, const Codebook& codebook);

// Direction obtained by rotating `reference` with the unit quaternion
// (w, x, y, z). Kinect reports joint orientations as quaternions; the bone
// direction is the rotated y axis.
Vec3 quaternion_direction(double w, double x, double y, double z, const Vec3& reference = {0.0, 1.0, 0.0});

// Angle-set file: one entry per line, '#' starts a comment.
//   theta <a> <b>
//   phi   <a> <b>
//   alpha <b> <a> <c>
AngleConfig parse_angle_config(std::istream& in);
AngleConfig load_angle_config(const std::filesystem::path& path);

// Skeleton stream: one JSON object per frame,
//   {"joints":[[px,py,pz,ox,oy,oz],[px,py,pz],...]}
// a joint with three values has no orientation.
std::vector<Skeleton> read_skeleton_stream(std::istream& in);
void write_skeleton_stream(std::ostream& out, std::span<const Skeleton> frames);

}  // namespace coupdate
