#pragma once

#include <json.hpp>

#include "coupdate/buffer.hpp"
#include "coupdate/classifier.hpp"
#include "coupdate/prediction.hpp"
#include "coupdate/types.hpp"

// nlohmann::json converters for the value types. Doubles are written in
// shortest round-trip form, so parse(dump(x)) == x exactly.
namespace coupdate {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const MultiModalSequence& s);
void from_json(const Json& j, MultiModalSequence& s);

void to_json(Json& j, const Thresholds& t);
void from_json(const Json& j, Thresholds& t);

void to_json(Json& j, const Prediction& p);
void from_json(const Json& j, Prediction& p);

void to_json(Json& j, const Hyperparams& hp);
void from_json(const Json& j, Hyperparams& hp);

void to_json(Json& j, const LinearModel& m);
void from_json(const Json& j, LinearModel& m);

void to_json(Json& j, const BufferEntry& e);
void from_json(const Json& j, BufferEntry& e);

void to_json(Json& j, const LabeledBuffer& b);
void from_json(const Json& j, LabeledBuffer& b);

const char* loss_name(Loss loss);
Loss parse_loss(const std::string& name);

}  // namespace coupdate
