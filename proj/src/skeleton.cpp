#include "coupdate/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "coupdate/bow.hpp"
#include "coupdate/serialization.hpp"

namespace coupdate {
namespace {

Vec3 sub(const Vec3& p, const Vec3& q) { return {p[0] - q[0], p[1] - q[1], p[2] - q[2]}; }
double dot(const Vec3& u, const Vec3& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]; }

const Joint& joint(const Skeleton& s, std::size_t i) {
    if (i >= s.joints.size()) throw ValidationError("joint index " + std::to_string(i) + " out of range");
    return s.joints[i];
}

const Vec3& orientation(const Skeleton& s, std::size_t i) {
    const Joint& j = joint(s, i);
    if (!j.orientation) throw ValidationError("joint " + std::to_string(i) + " has no orientation");
    return *j.orientation;
}

Vec3 bone(const Skeleton& s, std::size_t from, std::size_t to) {
    const Vec3 v = sub(joint(s, to).position, joint(s, from).position);
    if (dot(v, v) == 0.0) {
        throw ValidationError("joints " + std::to_string(from) + " and " + std::to_string(to) + " coincide");
    }
    return v;
}

}  // namespace

void AngleConfig::validate(std::size_t num_joints) const {
    auto ok = [&](std::size_t i) { return i < num_joints; };
    for (const auto& p : theta) {
        if (!ok(p.a) || !ok(p.b)) throw ValidationError("theta pair references a missing joint");
    }
    for (const auto& p : phi) {
        if (!ok(p.a) || !ok(p.b)) throw ValidationError("phi pair references a missing joint");
    }
    for (const auto& t : alpha) {
        if (!ok(t.a) || !ok(t.b) || !ok(t.c)) throw ValidationError("alpha triplet references a missing joint");
    }
}

double angle_between(const Vec3& u, const Vec3& v) {
    const double nu = std::sqrt(dot(u, u));
    const double nv = std::sqrt(dot(v, v));
    if (!(nu > 0.0) || !(nv > 0.0)) throw ValidationError("angle with a zero-length vector");
    return std::acos(std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0));
}

double theta_angle(const Skeleton& skeleton, JointPair pair) {
    return angle_between(orientation(skeleton, pair.a), orientation(skeleton, pair.b));
}

double phi_angle(const Skeleton& skeleton, JointPair pair) {
    return angle_between(orientation(skeleton, pair.a), bone(skeleton, pair.a, pair.b));
}

double alpha_angle(const Skeleton& skeleton, JointTriplet t) {
    return angle_between(bone(skeleton, t.a, t.b), bone(skeleton, t.a, t.c));
}

Features frame_vector(const Skeleton& skeleton, const AngleConfig& config) {
    config.validate(skeleton.joints.size());
    Features v;
    v.reserve(config.size());
    for (const auto& p : config.theta) v.push_back(theta_angle(skeleton, p));
    for (const auto& p : config.phi) v.push_back(phi_angle(skeleton, p));
    for (const auto& t : config.alpha) v.push_back(alpha_angle(skeleton, t));
    return v;
}

Features encode_skeleton_sequence(std::span<const Features> frames, const Codebook& codebook) {
    if (frames.empty()) throw ValidationError("cannot encode an empty frame sequence");
    return encode(frames, codebook);
}

Vec3 quaternion_direction(double w, double x, double y, double z, const Vec3& r) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (!(n > 0.0)) throw ValidationError("zero quaternion");
    w /= n;
    x /= n;
    y /= n;
    z /= n;
    // v' = v + 2w (q x v) + 2 q x (q x v), with q the vector part.
    const Vec3 q{x, y, z};
    const Vec3 t{2.0 * (q[1] * r[2] - q[2] * r[1]), 2.0 * (q[2] * r[0] - q[0] * r[2]),
                 2.0 * (q[0] * r[1] - q[1] * r[0])};
    const Vec3 qt{q[1] * t[2] - q[2] * t[1], q[2] * t[0] - q[0] * t[2], q[0] * t[1] - q[1] * t[0]};
    Vec3 out{r[0] + w * t[0] + qt[0], r[1] + w * t[1] + qt[1], r[2] + w * t[2] + qt[2]};
    const double len = std::sqrt(dot(out, out));
    for (double& c : out) c /= len;
    return out;
}

AngleConfig parse_angle_config(std::istream& in) {
    AngleConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind)) continue;
        std::vector<std::size_t> idx;
        long long v = 0;
        while (ss >> v) {
            if (v < 0) throw ValidationError("negative joint index on line " + std::to_string(line_no));
            idx.push_back(static_cast<std::size_t>(v));
        }
        if (!ss.eof()) throw ValidationError("malformed angle entry on line " + std::to_string(line_no));
        if ((kind == "theta" || kind == "phi") && idx.size() == 2) {
            (kind == "theta" ? cfg.theta : cfg.phi).push_back({idx[0], idx[1]});
        } else if (kind == "alpha" && idx.size() == 3) {
            cfg.alpha.push_back({idx[0], idx[1], idx[2]});
        } else {
            throw ValidationError("malformed angle entry on line " + std::to_string(line_no));
        }
    }
    return cfg;
}

AngleConfig load_angle_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open angle config '" + path.string() + "'");
    return parse_angle_config(in);
}

std::vector<Skeleton> read_skeleton_stream(std::istream& in) {
    std::vector<Skeleton> frames;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(std::string("malformed skeleton frame: ") + e.what());
        }
        Skeleton s;
        for (const auto& raw : j.at("joints")) {
            const auto v = raw.get<std::vector<double>>();
            if (v.size() != 3 && v.size() != 6) throw ValidationError("a joint needs 3 or 6 values");
            Joint jt;
            jt.position = {v[0], v[1], v[2]};
            if (v.size() == 6) {
                const Vec3 o{v[3], v[4], v[5]};
                if (std::abs(std::sqrt(dot(o, o)) - 1.0) > 1e-6) {
                    throw ValidationError("joint orientation is not a unit vector");
                }
                jt.orientation = o;
            }
            s.joints.push_back(jt);
        }
        if (!frames.empty() && frames.front().joints.size() != s.joints.size()) {
            throw ValidationError("skeleton frames disagree on the joint count");
        }
        frames.push_back(std::move(s));
    }
    return frames;
}

void write_skeleton_stream(std::ostream& out, std::span<const Skeleton> frames) {
    for (const auto& s : frames) {
        Json joints = Json::array();
        for (const auto& jt : s.joints) {
            std::vector<double> v(jt.position.begin(), jt.position.end());
            if (jt.orientation) v.insert(v.end(), jt.orientation->begin(), jt.orientation->end());
            joints.push_back(v);
        }
        out << Json{{"joints", std::move(joints)}}.dump() << '\n';
    }
}

}  // namespace coupdate
