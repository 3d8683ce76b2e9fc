#include "coupdate/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

namespace coupdate {

void StreamConfig::validate() const {
    if (num_classes < 2) throw ValidationError("generator needs at least two classes");
    if (num_subjects < 1 || repetitions < 1) throw ValidationError("generator needs subjects and repetitions");
    if (channels.empty()) throw ValidationError("generator needs at least one channel");
    if (!(class_separation > 0.0) || !(subject_scale > 0.0) || !(noise > 0.0)) {
        throw ValidationError("generator scales must be positive");
    }
    if (styles < 0 || !(style_scale > 0.0)) throw ValidationError("styles must be >= 0 and style_scale positive");
    if (!(confusable_factor > 0.0 && confusable_factor <= 1.0)) {
        throw ValidationError("confusable_factor must lie in (0, 1]");
    }
    std::set<ChannelId> ids;
    for (const auto& ch : channels) {
        if (ch.id.empty() || !ids.insert(ch.id).second) throw ValidationError("channel ids must be unique");
        if (ch.dim == 0) throw ValidationError("channel '" + ch.id + "' has zero dimension");
        for (const auto& [a, b] : ch.confusable) {
            if (a < 0 || b < 0 || a >= num_classes || b >= num_classes || a == b) {
                throw ValidationError("invalid confusable pair in channel '" + ch.id + "'");
            }
        }
    }
}

Dataset generate(const StreamConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const auto a = static_cast<std::size_t>(config.num_classes);

    // prototypes[channel][class]
    std::vector<std::vector<Features>> prototypes;
    for (const auto& ch : config.channels) {
        std::vector<Features> protos(a, Features(ch.dim));
        for (auto& p : protos) {
            for (double& v : p) v = config.class_separation * unit(rng);
        }
        for (const auto& [i, j] : ch.confusable) {
            auto& pi = protos[static_cast<std::size_t>(i)];
            auto& pj = protos[static_cast<std::size_t>(j)];
            for (std::size_t k = 0; k < ch.dim; ++k) {
                const double mid = 0.5 * (pi[k] + pj[k]);
                const double half = 0.5 * config.confusable_factor * (pj[k] - pi[k]);
                pi[k] = mid - half;
                pj[k] = mid + half;
            }
        }
        prototypes.push_back(std::move(protos));
    }

    // style_vectors[channel][class][style]
    std::vector<std::vector<std::vector<Features>>> style_vectors;
    for (const auto& ch : config.channels) {
        std::vector<std::vector<Features>> per_class(a);
        for (auto& styles : per_class) {
            styles.assign(static_cast<std::size_t>(config.styles), Features(ch.dim));
            for (auto& v : styles) {
                for (double& x : v) x = config.style_scale * unit(rng);
            }
        }
        style_vectors.push_back(std::move(per_class));
    }

    Dataset ds;
    ds.num_classes = config.num_classes;
    for (const auto& ch : config.channels) ds.channels.push_back(ch.id);
    std::sort(ds.channels.begin(), ds.channels.end());

    char buf[64];
    for (int s = 0; s < config.num_subjects; ++s) {
        std::snprintf(buf, sizeof(buf), "subj%02d", s);
        const std::string subject = buf;
        for (int c = 0; c < config.num_classes; ++c) {
            std::vector<Features> offsets;
            for (std::size_t k = 0; k < config.channels.size(); ++k) {
                Features o(config.channels[k].dim);
                for (double& v : o) v = config.subject_scale * unit(rng);
                if (config.styles > 0) {
                    std::uniform_int_distribution<int> pick(0, config.styles - 1);
                    const Features& style =
                        style_vectors[k][static_cast<std::size_t>(c)][static_cast<std::size_t>(pick(rng))];
                    for (std::size_t j = 0; j < o.size(); ++j) o[j] += style[j];
                }
                offsets.push_back(std::move(o));
            }
            for (int r = 0; r < config.repetitions; ++r) {
                MultiModalSequence seq;
                std::snprintf(buf, sizeof(buf), "s%02d_a%02d_r%d", s, c, r);
                seq.sequence_id = buf;
                seq.subject_id = subject;
                seq.true_label = c;
                for (std::size_t k = 0; k < config.channels.size(); ++k) {
                    const Features& proto = prototypes[k][static_cast<std::size_t>(c)];
                    Features x(proto.size());
                    for (std::size_t j = 0; j < x.size(); ++j) {
                        x[j] = proto[j] + offsets[k][j] + config.noise * unit(rng);
                    }
                    seq.channels.emplace(config.channels[k].id, std::move(x));
                }
                ds.sequences.push_back(std::move(seq));
            }
        }
    }
    return ds;
}

}  // namespace coupdate
