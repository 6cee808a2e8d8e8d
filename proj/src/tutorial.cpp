#include "tutorlab/tutorial.hpp"

#include "json.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "tutorlab/errors.hpp"

namespace tutorlab {
namespace {

using nlohmann::json;

json highlights_to_json(const HighlightSet& set) {
  json spans = json::array();
  for (const auto& s : set.spans) {
    spans.push_back({{"begin", s.begin},
                     {"end", s.end},
                     {"feature", s.feature},
                     {"token", s.token},
                     {"polarity", std::string(to_string(s.polarity))},
                     {"intensity", s.intensity}});
  }
  return spans;
}

HighlightSet highlights_from_json(const json& spans) {
  HighlightSet set;
  for (const auto& s : spans) {
    HighlightSpan span;
    span.begin = s.at("begin").get<std::size_t>();
    span.end = s.at("end").get<std::size_t>();
    span.feature = s.at("feature").get<FeatureIndex>();
    span.token = s.at("token").get<std::string>();
    span.polarity = parse_polarity(s.at("polarity").get<std::string>());
    span.intensity = s.at("intensity").get<double>();
    set.spans.push_back(std::move(span));
  }
  return set;
}

std::map<std::string_view, const Review*> index_reviews(std::span<const Review> reviews) {
  std::map<std::string_view, const Review*> out;
  for (const auto& r : reviews) out.emplace(r.id, &r);
  return out;
}

}  // namespace

GuidelineDoc GuidelineDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open guidelines " + path.string());
  GuidelineDoc doc;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      auto note = line.substr(first + 1);
      if (!note.empty() && note.front() == ' ') note.erase(0, 1);
      if (!doc.source_note.empty()) doc.source_note += ' ';
      doc.source_note += note;
      continue;
    }
    doc.items.push_back(line.substr(first));
  }
  if (doc.items.empty()) throw ValidationError("guideline file " + path.string() + " has no guidelines");
  return doc;
}

GuidelineDoc GuidelineDoc::defaults() {
  GuidelineDoc doc;
  doc.source_note = "Built-in default list summarizing published observations on deceptive hotel reviews.";
  doc.items = {
      "Deceptive reviews tend to name the city or the hotel repeatedly instead of describing where things are.",
      "Genuine reviews more often give spatial details, such as the floor, the bathroom, the location or the street.",
      "Deceptive reviews lean on superlatives and strong emotional words (\"amazing\", \"luxury\", \"perfect\").",
      "Deceptive reviews often talk about the writer and their companions (I, my, husband, family, vacation) more "
      "than the hotel.",
      "Genuine reviews mention concrete specifics like prices, dates, sizes and small annoyances.",
      "Deceptive reviews tend to describe the purpose of the trip (business, anniversary, wedding) at length.",
      "Genuine reviews use more nouns and numbers; deceptive reviews use more verbs and adverbs.",
      "A review that is uniformly positive or uniformly negative with little detail deserves extra suspicion.",
  };
  return doc;
}

std::string_view to_string(TutorialPlanKind kind) {
  switch (kind) {
    case TutorialPlanKind::none: return "none";
    case TutorialPlanKind::guidelines: return "guidelines";
    case TutorialPlanKind::examples: return "examples";
    case TutorialPlanKind::combined: return "combined";
  }
  return "none";
}

TutorialPlanKind parse_tutorial_plan_kind(std::string_view text) {
  for (const auto k : {TutorialPlanKind::none, TutorialPlanKind::guidelines, TutorialPlanKind::examples,
                       TutorialPlanKind::combined}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown tutorial kind '" + std::string(text) + "'");
}

std::string TutorialPlan::to_json() const {
  json j;
  j["kind"] = std::string(to_string(kind));
  j["pre_guidelines_timer_s"] = pre_guidelines_timer_s;
  j["post_guidelines_timer_s"] = post_guidelines_timer_s;
  j["selection_method"] = selection_method ? json(std::string(to_string(*selection_method))) : json(nullptr);
  j["importance_method"] = importance_method ? json(std::string(to_string(*importance_method))) : json(nullptr);
  if (guidelines) {
    j["guidelines"] = {{"items", guidelines->items}, {"source_note", guidelines->source_note}};
  } else {
    j["guidelines"] = nullptr;
  }
  json items = json::array();
  for (const auto& item : this->items) {
    items.push_back({{"review_id", item.review_id},
                     {"text", item.text},
                     {"tokens", item.tokens},
                     {"actual_label", std::string(tutorlab::to_string(item.actual_label))},
                     {"predicted_label", std::string(tutorlab::to_string(item.predicted_label))},
                     {"reveal_timer_s", item.reveal_timer_s},
                     {"highlights", highlights_to_json(item.highlights)}});
  }
  j["items"] = std::move(items);
  return j.dump(2);
}

TutorialPlan TutorialPlan::from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    TutorialPlan plan;
    plan.kind = parse_tutorial_plan_kind(j.at("kind").get<std::string>());
    plan.pre_guidelines_timer_s = j.at("pre_guidelines_timer_s").get<int>();
    plan.post_guidelines_timer_s = j.at("post_guidelines_timer_s").get<int>();
    if (!j.at("selection_method").is_null()) {
      plan.selection_method = parse_selection_method(j["selection_method"].get<std::string>());
    }
    if (!j.at("importance_method").is_null()) {
      plan.importance_method = parse_importance_method(j["importance_method"].get<std::string>());
    }
    if (!j.at("guidelines").is_null()) {
      GuidelineDoc doc;
      doc.items = j["guidelines"].at("items").get<std::vector<std::string>>();
      doc.source_note = j["guidelines"].at("source_note").get<std::string>();
      plan.guidelines = std::move(doc);
    }
    for (const auto& item : j.at("items")) {
      TutorialItem t;
      t.review_id = item.at("review_id").get<std::string>();
      t.text = item.at("text").get<std::string>();
      t.tokens = item.at("tokens").get<std::vector<std::string>>();
      t.actual_label = parse_label(item.at("actual_label").get<std::string>());
      t.predicted_label = parse_label(item.at("predicted_label").get<std::string>());
      t.reveal_timer_s = item.at("reveal_timer_s").get<int>();
      t.highlights = highlights_from_json(item.at("highlights"));
      plan.items.push_back(std::move(t));
    }
    return plan;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("malformed tutorial plan: ") + e.what());
  }
}

void TutorialPlan::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << to_json() << '\n';
}

TutorialPlan TutorialPlan::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open tutorial plan " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

TutorialPlan no_tutorial() { return TutorialPlan{}; }

TutorialPlan assemble_guidelines(const GuidelineDoc& guidelines) {
  if (guidelines.items.empty()) throw ValidationError("guideline document is empty");
  for (const auto& item : guidelines.items) {
    if (item.empty()) throw ValidationError("guideline document contains an empty item");
  }
  TutorialPlan plan;
  plan.kind = TutorialPlanKind::guidelines;
  plan.pre_guidelines_timer_s = kGuidelinesTimerSeconds;
  plan.guidelines = guidelines;
  return plan;
}

TutorialPlan assemble_examples(const TutorialSelection& selection, std::span<const Review> reviews,
                               const Predictor& predictor, const ImportanceSource& importance) {
  if (selection.sequence.empty()) throw ValidationError("tutorial selection is empty");
  if (!importance.matrix || !importance.vocab) throw ValidationError("tutorial importance source is incomplete");
  const auto by_id = index_reviews(reviews);
  TutorialPlan plan;
  plan.kind = TutorialPlanKind::examples;
  plan.selection_method = selection.method;
  plan.importance_method = importance.matrix->method();
  for (const auto& id : selection.sequence) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw NotFound("tutorial review '" + id + "' not found");
    const Review& review = *it->second;
    if (review.split != Split::train) {
      throw ValidationError("tutorial review '" + id + "' is not in the training split");
    }
    const ImportanceRow* row = importance.matrix->find(id);
    if (!row) throw NotFound("no importance row for tutorial review '" + id + "'");
    TutorialItem item;
    item.review_id = id;
    item.text = review.text;
    item.tokens = review.tokens;
    item.actual_label = review.label;
    item.predicted_label = predictor.predict(review.text).label;
    item.highlights = build_highlights(*row, review, *importance.vocab, importance.matrix->is_signed());
    plan.items.push_back(std::move(item));
  }
  return plan;
}

TutorialPlan assemble_combined(const GuidelineDoc& guidelines, const TutorialSelection& selection,
                               std::span<const Review> reviews, const Predictor& predictor,
                               const ImportanceSource& importance) {
  const TutorialPlan guideline_part = assemble_guidelines(guidelines);
  TutorialPlan plan = assemble_examples(selection, reviews, predictor, importance);
  plan.kind = TutorialPlanKind::combined;
  plan.pre_guidelines_timer_s = kCombinedGuidelinesTimerSeconds;
  plan.post_guidelines_timer_s = kCombinedGuidelinesTimerSeconds;
  plan.guidelines = guideline_part.guidelines;
  return plan;
}

}  // namespace tutorlab
