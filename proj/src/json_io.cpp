#include "grec/json_io.hpp"

#include <algorithm>

#include "grec/error.hpp"

namespace grec {

ojson scene_to_json(const Scene& scene) {
  ojson j;
  j["scene_id"] = scene.scene_id;
  j["seed"] = scene.seed;
  ojson grid = ojson::array();
  for (const Block& b : scene.blocks) {
    ojson e;
    e["x"] = b.coord.x;
    e["y"] = b.coord.y;
    e["z"] = b.coord.z;
    e["color"] = b.color.name;
    e["id"] = b.id.str();
    grid.push_back(e);
  }
  j["grid"] = grid;
  return j;
}

Scene scene_from_json(const ojson& j, const Palette& palette) {
  Scene scene;
  scene.scene_id = j.at("scene_id").get<std::string>();
  scene.seed = j.at("seed").get<std::uint64_t>();
  int max_y = 0;
  for (const auto& e : j.at("grid")) {
    Block b;
    b.coord = {e.at("x").get<int>(), e.at("y").get<int>(), e.at("z").get<int>()};
    const std::string color = e.at("color").get<std::string>();
    const BlockColor* found = nullptr;
    for (const auto& c : palette)
      if (c.name == color) found = &c;
    if (found == nullptr) throw SchemaMismatch("unknown color in scene JSON: " + color);
    b.color = *found;
    const auto id = parse_block_id(e.at("id").get<std::string>());
    if (!id) throw SchemaMismatch("bad block id in scene JSON");
    b.id = *id;
    max_y = std::max(max_y, b.coord.y);
    scene.blocks.push_back(b);
  }
  scene.grid_height = std::max(kDefaultGridHeight, max_y + 1);
  std::sort(scene.blocks.begin(), scene.blocks.end(),
            [](const Block& a, const Block& b) { return RowMajorLess{}(a.coord, b.coord); });
  return scene;
}

ojson camera_to_json(const CameraPose& cam) {
  ojson j;
  j["position"] = {cam.position.x, cam.position.y, cam.position.z};
  j["yaw"] = cam.yaw;
  j["pitch"] = cam.pitch;
  j["fov"] = cam.fov;
  j["width"] = cam.image_width;
  j["height"] = cam.image_height;
  return j;
}

CameraPose camera_from_json(const ojson& j) {
  CameraPose cam;
  cam.position = {j.at("position")[0].get<double>(), j.at("position")[1].get<double>(),
                  j.at("position")[2].get<double>()};
  cam.yaw = j.at("yaw").get<double>();
  cam.pitch = j.at("pitch").get<double>();
  cam.fov = j.at("fov").get<double>();
  cam.image_width = j.at("width").get<int>();
  cam.image_height = j.at("height").get<int>();
  return cam;
}

ojson annotations_to_json(const std::string& scene_id, const CameraPose& camera,
                          const std::vector<AnnotationTriplet>& annotations) {
  ojson j;
  j["scene_id"] = scene_id;
  j["camera"] = camera_to_json(camera);
  ojson list = ojson::array();
  for (const AnnotationTriplet& a : annotations) {
    ojson e;
    e["id"] = a.id.str();
    e["coord"] = {a.coord.x, a.coord.y, a.coord.z};
    e["bbox"] = {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h};
    list.push_back(e);
  }
  j["annotations"] = list;
  return j;
}

namespace {

ojson reference_to_json(const StructureRef& r) {
  ojson j;
  j["kind"] = structure_kind_word(r.kind);
  if (r.color) j["color"] = *r.color;
  return j;
}

StructureRef reference_from_json(const ojson& j) {
  StructureRef r{StructureKind::Column, std::nullopt};
  const std::string kind = j.at("kind").get<std::string>();
  bool found = false;
  for (StructureKind k : {StructureKind::Column, StructureKind::Row, StructureKind::Bar,
                          StructureKind::Arch, StructureKind::LShape,
                          StructureKind::ScatterGroup}) {
    if (kind == structure_kind_word(k)) {
      r.kind = k;
      found = true;
    }
  }
  if (!found) throw SchemaMismatch("unknown structure kind: " + kind);
  if (j.contains("color")) r.color = j.at("color").get<std::string>();
  return r;
}

}  // namespace

ojson expr_to_json(const RefExpr& expr) {
  ojson j;
  j["form"] = expr_form_name(expr.form);
  ojson slots;
  if (expr.color) slots["color"] = *expr.color;
  if (expr.ordinal) slots["ordinal"] = *expr.ordinal;
  if (expr.position) slots["position"] = position_word(*expr.position);
  if (expr.reference) slots["reference"] = reference_to_json(*expr.reference);
  if (expr.perspective) slots["perspective"] = perspective_phrase(*expr.perspective);
  if (expr.form == ExprForm::ColorPlural) slots["plural"] = expr.plural;
  j["slots"] = slots;
  j["surface"] = expr.surface;
  ojson intended = ojson::array();
  for (const BlockId& id : expr.intended) intended.push_back(id.str());
  j["intended"] = intended;
  return j;
}

RefExpr expr_from_json(const ojson& j) {
  RefExpr e;
  const auto form = parse_expr_form(j.at("form").get<std::string>());
  if (!form) throw SchemaMismatch("unknown expression form");
  e.form = *form;
  const ojson& slots = j.at("slots");
  if (slots.contains("color")) e.color = slots.at("color").get<std::string>();
  if (slots.contains("ordinal")) e.ordinal = slots.at("ordinal").get<int>();
  if (slots.contains("position")) {
    const auto p = parse_position(slots.at("position").get<std::string>());
    if (!p) throw SchemaMismatch("unknown position word");
    e.position = p;
  }
  if (slots.contains("reference")) e.reference = reference_from_json(slots.at("reference"));
  if (slots.contains("perspective")) {
    const auto p = parse_perspective(slots.at("perspective").get<std::string>());
    if (!p) throw SchemaMismatch("unknown perspective phrase");
    e.perspective = p;
  }
  if (slots.contains("plural")) e.plural = slots.at("plural").get<bool>();
  e.surface = j.at("surface").get<std::string>();
  for (const auto& id : j.at("intended")) {
    const auto parsed = parse_block_id(id.get<std::string>());
    if (!parsed) throw SchemaMismatch("bad id in intended list");
    e.intended.push_back(*parsed);
  }
  std::sort(e.intended.begin(), e.intended.end());
  return e;
}

ojson dialogue_to_json(const Dialogue& d) {
  ojson j;
  ojson turns = ojson::array();
  for (const DialogueTurn& t : d.turns) {
    ojson tj;
    tj["speaker"] = speaker_name(t.speaker);
    tj["text"] = t.text;
    ojson mentions = ojson::array();
    for (const Mention& m : t.mentions) {
      ojson mj;
      mj["start"] = m.start;
      mj["end"] = m.end;
      mj["chain"] = m.chain_id;
      mentions.push_back(mj);
    }
    tj["mentions"] = mentions;
    turns.push_back(tj);
  }
  j["turns"] = turns;
  ojson chains = ojson::array();
  for (const Chain& c : d.chains) {
    ojson cj;
    cj["chain_id"] = c.chain_id;
    ojson mentions = ojson::array();
    for (const MentionRef& m : c.mentions) {
      ojson mj;
      mj["turn"] = m.turn;
      mj["start"] = m.start;
      mj["end"] = m.end;
      mentions.push_back(mj);
    }
    cj["mentions"] = mentions;
    cj["singleton"] = c.singleton;
    chains.push_back(cj);
  }
  j["chains"] = chains;
  ojson fm;
  fm["turn"] = d.final_mention.turn;
  fm["start"] = d.final_mention.start;
  fm["end"] = d.final_mention.end;
  fm["chain"] = d.final_mention.chain_id;
  j["final_mention"] = fm;
  return j;
}

Dialogue dialogue_from_json(const ojson& j) {
  Dialogue d;
  for (const auto& tj : j.at("turns")) {
    DialogueTurn t;
    const std::string speaker = tj.at("speaker").get<std::string>();
    if (speaker == "Architect") t.speaker = Speaker::Architect;
    else if (speaker == "Builder") t.speaker = Speaker::Builder;
    else throw SchemaMismatch("unknown speaker: " + speaker);
    t.text = tj.at("text").get<std::string>();
    for (const auto& mj : tj.at("mentions")) {
      t.mentions.push_back({mj.at("start").get<int>(), mj.at("end").get<int>(),
                            mj.at("chain").get<std::string>()});
    }
    d.turns.push_back(std::move(t));
  }
  for (const auto& cj : j.at("chains")) {
    Chain c;
    c.chain_id = cj.at("chain_id").get<std::string>();
    for (const auto& mj : cj.at("mentions")) {
      c.mentions.push_back(
          {mj.at("turn").get<int>(), mj.at("start").get<int>(), mj.at("end").get<int>()});
    }
    c.singleton = cj.at("singleton").get<bool>();
    d.chains.push_back(std::move(c));
  }
  const ojson& fm = j.at("final_mention");
  d.final_mention = {fm.at("turn").get<int>(), fm.at("start").get<int>(),
                     fm.at("end").get<int>(), fm.at("chain").get<std::string>()};
  return d;
}

ojson sample_to_json(const TrainingSample& s) {
  ojson j;
  j["sample_id"] = s.sample_id;
  j["image"] = s.image_ref;
  j["dialogue"] = dialogue_to_json(s.dialogue);
  ojson targets = ojson::array();
  for (const TargetBox& t : s.targets) {
    ojson tj;
    tj["id"] = t.id.str();
    tj["bbox"] = {t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h};
    targets.push_back(tj);
  }
  j["targets"] = targets;
  j["tier"] = tier_name(s.tier);
  ojson prov;
  prov["generator"] = s.provenance.generator;
  prov["seed"] = s.provenance.seed;
  prov["backend"] = s.provenance.backend;
  j["provenance"] = prov;
  return j;
}

TrainingSample sample_from_json(const ojson& j) {
  TrainingSample s;
  s.sample_id = j.at("sample_id").get<std::string>();
  s.image_ref = j.at("image").get<std::string>();
  s.dialogue = dialogue_from_json(j.at("dialogue"));
  for (const auto& tj : j.at("targets")) {
    const auto id = parse_block_id(tj.at("id").get<std::string>());
    if (!id) throw SchemaMismatch("bad target id");
    const auto& b = tj.at("bbox");
    s.targets.push_back(
        {*id, {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()}});
  }
  const std::string tier = j.at("tier").get<std::string>();
  if (tier == "template") s.tier = Tier::Template;
  else if (tier == "prompted") s.tier = Tier::Prompted;
  else if (tier == "dialogue") s.tier = Tier::Dialogue;
  else throw SchemaMismatch("unknown tier: " + tier);
  const ojson& prov = j.at("provenance");
  s.provenance.generator = prov.at("generator").get<std::string>();
  s.provenance.seed = prov.at("seed").get<std::uint64_t>();
  s.provenance.backend = prov.at("backend").get<std::string>();
  return s;
}

ojson recovery_result_to_json(const RecoveryResult& r) {
  ojson j;
  j["coord"] = {r.block_coord.x, r.block_coord.y, r.block_coord.z};
  j["recovered"] = std::string(1, r.recovered_letter);
  j["margin"] = r.margin;
  ojson mae;
  for (const auto& [letter, value] : r.per_candidate_mae)
    mae[std::string(1, letter)] = value;
  j["mae"] = mae;
  return j;
}

ojson prediction_to_json(const PredictionSet& p) {
  ojson j;
  j["sample_id"] = p.sample_id;
  ojson boxes = ojson::array();
  for (const BoxF& b : p.boxes) boxes.push_back({b.x, b.y, b.w, b.h});
  j["boxes"] = boxes;
  return j;
}

PredictionSet prediction_from_json(const ojson& j) {
  PredictionSet p;
  p.sample_id = j.at("sample_id").get<std::string>();
  for (const auto& b : j.at("boxes")) {
    if (!b.is_array() || b.size() != 4) throw SchemaMismatch("bad box in prediction");
    const BoxF box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                   b[3].get<double>()};
    if (box.w <= 0 || box.h <= 0) throw SchemaMismatch("prediction box has non-positive area");
    p.boxes.push_back(box);
  }
  return p;
}

ojson report_to_json(const EvalReport& r) {
  ojson j;
  j["setting"] = eval_setting_name(r.setting);
  j["n_samples"] = r.n_samples;
  j["mean_f1"] = r.mean_f1;
  j["precision_at_f1_1"] = r.precision_at_f1_1;
  ojson per = ojson::array();
  for (const SampleScore& s : r.per_sample) {
    ojson sj;
    sj["sample_id"] = s.sample_id;
    sj["f1"] = s.f1;
    sj["tp"] = s.counts.tp;
    sj["fp"] = s.counts.fp;
    sj["fn"] = s.counts.fn;
    per.push_back(sj);
  }
  j["per_sample"] = per;
  return j;
}

}  // namespace grec
