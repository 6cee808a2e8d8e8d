#pragma once

// JSON encodings shared by the event log and the service endpoints.

#include "json.hpp"

#include "tutorlab/explainer.hpp"
#include "tutorlab/platform/condition.hpp"
#include "tutorlab/platform/session.hpp"

namespace tutorlab {

void to_json(nlohmann::json& j, Label v);
void from_json(const nlohmann::json& j, Label& v);
void to_json(nlohmann::json& j, Phase v);
void from_json(const nlohmann::json& j, Phase& v);

void to_json(nlohmann::json& j, const Condition& c);
void from_json(const nlohmann::json& j, Condition& c);

void to_json(nlohmann::json& j, const AttentionAnswers& a);
void from_json(const nlohmann::json& j, AttentionAnswers& a);

void to_json(nlohmann::json& j, const SurveyRecord& s);
void from_json(const nlohmann::json& j, SurveyRecord& s);

void to_json(nlohmann::json& j, const TrainingStep& s);
void from_json(const nlohmann::json& j, TrainingStep& s);

void to_json(nlohmann::json& j, const PredictionResponse& r);
void to_json(nlohmann::json& j, const HighlightSet& h);
void to_json(nlohmann::json& j, const Session& s);

}  // namespace tutorlab
