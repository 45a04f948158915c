#pragma once

#include <json.hpp>

#include "grec/eval.hpp"
#include "grec/recover.hpp"
#include "grec/refexpr.hpp"
#include "grec/render.hpp"
#include "grec/sample.hpp"
#include "grec/scene.hpp"

namespace grec {

// Insertion-ordered JSON keeps every emitted document in its documented
// canonical field order.
using ojson = nlohmann::ordered_json;

ojson scene_to_json(const Scene& scene);
Scene scene_from_json(const ojson& j, const Palette& palette = default_palette());

ojson camera_to_json(const CameraPose& cam);
CameraPose camera_from_json(const ojson& j);

ojson annotations_to_json(const std::string& scene_id, const CameraPose& camera,
                          const std::vector<AnnotationTriplet>& annotations);

ojson expr_to_json(const RefExpr& expr);
RefExpr expr_from_json(const ojson& j);

ojson dialogue_to_json(const Dialogue& d);
Dialogue dialogue_from_json(const ojson& j);

ojson sample_to_json(const TrainingSample& s);
TrainingSample sample_from_json(const ojson& j);

ojson recovery_result_to_json(const RecoveryResult& r);

ojson prediction_to_json(const PredictionSet& p);
PredictionSet prediction_from_json(const ojson& j);

ojson report_to_json(const EvalReport& r);

}  // namespace grec
