// Command-line front end: training, explanation, selection, tutorial
// assembly, the study service, simulation and analysis.

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "tutorlab/analysis.hpp"
#include "tutorlab/errors.hpp"
#include "tutorlab/explainer.hpp"
#include "tutorlab/pipeline.hpp"
#include "tutorlab/platform/platform.hpp"
#include "tutorlab/selector.hpp"
#include "tutorlab/service.hpp"
#include "tutorlab/simulation.hpp"
#include "tutorlab/synthetic_corpus.hpp"
#include "tutorlab/tutorial.hpp"

// After Eigen: <resolv.h> defines a _res macro that breaks Eigen headers.
#include "httplib.h"

namespace fs = std::filesystem;
using namespace tutorlab;

namespace {

constexpr const char* kStoreEnv = "TUTORLAB_STORE";

std::string store_path(const std::string& flag) {
  if (const char* env = std::getenv(kStoreEnv); env && *env) return env;
  return flag;
}

GuidelineDoc guidelines_from(const std::string& path) {
  return path.empty() ? GuidelineDoc::defaults() : GuidelineDoc::load(path);
}

struct StudyArgs {
  std::string corpus;
  std::string model_dir;
  std::string experiment = "exp1";
  std::string attention;
  std::string external_lime;
  std::string guidelines;
  std::size_t quota = kDefaultQuota;
  std::uint64_t seed = 0;
};

void add_study_options(CLI::App* cmd, StudyArgs& a) {
  cmd->add_option("--corpus", a.corpus, "Corpus manifest (id,path,label)")->required();
  cmd->add_option("--model-dir", a.model_dir, "Directory written by `train`")->required();
  cmd->add_option("--experiment", a.experiment, "exp1, exp2 or exp3")
      ->check(CLI::IsMember({"exp1", "exp2", "exp3"}));
  cmd->add_option("--attention", a.attention, "Attention importance file (exp3)");
  cmd->add_option("--external-lime", a.external_lime, "External LIME importance file (exp3)");
  cmd->add_option("--guidelines", a.guidelines, "Guideline text file");
  cmd->add_option("--quota", a.quota, "Sessions per condition");
  cmd->add_option("--seed", a.seed, "Study seed");
}

std::shared_ptr<const StudyMaterials> materials_from(const StudyArgs& a) {
  const auto loaded = load_model(a.corpus, a.model_dir);
  std::vector<std::string> ids;
  for (const auto& r : loaded.reviews) ids.push_back(r.id);
  const IngestContext ctx{loaded.vocab->size(), &ids};
  MaterialsOptions options;
  options.seed = a.seed;
  std::vector<std::string> warnings;
  if (!a.attention.empty()) options.attention = ingest_importance(a.attention, false, ctx, &warnings);
  if (!a.external_lime.empty()) options.external_lime = ingest_importance(a.external_lime, true, ctx, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return std::make_shared<StudyMaterials>(build_study_materials(parse_experiment(a.experiment), loaded.reviews,
                                                                loaded.model, loaded.vocab,
                                                                guidelines_from(a.guidelines), options));
}

std::vector<Review> reviews_for_split(const std::vector<Review>& reviews, const std::string& split) {
  if (split == "all") return reviews;
  return filter_split(reviews, split == "train" ? Split::train : Split::test);
}

httplib::Server* g_server = nullptr;
void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deception-detection tutorial and study toolkit"};
  app.require_subcommand(1);

  // synth-corpus
  SyntheticCorpusOptions synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Write a seeded synthetic review corpus");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--per-class", synth.per_class, "Reviews per label");
  synth_cmd->add_option("--seed", synth.seed, "Seed");

  // train
  std::string train_corpus, train_out;
  PipelineOptions pipeline;
  auto* train_cmd = app.add_subcommand("train", "Fit the linear SVM with cross-validated C");
  train_cmd->add_option("--corpus", train_corpus, "Corpus manifest")->required();
  train_cmd->add_option("--out", train_out, "Model directory")->required();
  train_cmd->add_option("--seed", pipeline.seed, "Split, fold and optimizer seed");
  train_cmd->add_option("--folds", pipeline.folds, "Cross-validation folds");
  train_cmd->add_option("--grid", pipeline.c_grid, "C grid");

  // explain
  std::string ex_corpus, ex_model, ex_method = "svm", ex_split = "all", ex_out;
  LimeOptions lime;
  auto* explain_cmd = app.add_subcommand("explain", "Write per-review feature importance");
  explain_cmd->add_option("--corpus", ex_corpus, "Corpus manifest")->required();
  explain_cmd->add_option("--model-dir", ex_model, "Model directory")->required();
  explain_cmd->add_option("--method", ex_method, "svm or lime")->check(CLI::IsMember({"svm", "lime"}));
  explain_cmd->add_option("--split", ex_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  explain_cmd->add_option("--samples", lime.n_samples, "LIME perturbation samples");
  explain_cmd->add_option("--seed", lime.seed, "LIME seed");
  explain_cmd->add_option("--out", ex_out, "Importance file")->required();

  // select
  std::string sel_corpus, sel_model, sel_importance, sel_method, sel_out;
  std::size_t sel_budget = kTutorialBudget;
  std::uint64_t sel_seed = 0;
  auto* select_cmd = app.add_subcommand("select", "Choose tutorial examples");
  select_cmd->add_option("--corpus", sel_corpus, "Corpus manifest")->required();
  select_cmd->add_option("--model-dir", sel_model, "Model directory")->required();
  select_cmd->add_option("--importance", sel_importance, "Importance file from `explain`")->required();
  select_cmd->add_option("--method", sel_method, "random, sp-lime or sr")
      ->required()
      ->check(CLI::IsMember({"random", "sp-lime", "sr"}));
  select_cmd->add_option("--budget", sel_budget, "Number of examples");
  select_cmd->add_option("--seed", sel_seed, "Seed for random selection");
  select_cmd->add_option("--out", sel_out, "Selection JSON")->required();

  // build-tutorial
  std::string bt_kind, bt_corpus, bt_model, bt_selection, bt_importance, bt_guidelines, bt_out;
  auto* build_cmd = app.add_subcommand("build-tutorial", "Assemble a tutorial plan");
  build_cmd->add_option("--kind", bt_kind, "guidelines, examples or combined")
      ->required()
      ->check(CLI::IsMember({"guidelines", "examples", "combined"}));
  build_cmd->add_option("--corpus", bt_corpus, "Corpus manifest");
  build_cmd->add_option("--model-dir", bt_model, "Model directory");
  build_cmd->add_option("--selection", bt_selection, "Selection JSON from `select`");
  build_cmd->add_option("--importance", bt_importance, "Importance file used for highlights");
  build_cmd->add_option("--guidelines", bt_guidelines, "Guideline text file");
  build_cmd->add_option("--out", bt_out, "Plan JSON")->required();

  // serve
  StudyArgs serve_args;
  std::string serve_store = "study.log", serve_host = "127.0.0.1";
  int serve_port = 8080;
  auto* serve_cmd = app.add_subcommand("serve", "Run the study service");
  add_study_options(serve_cmd, serve_args);
  serve_cmd->add_option("--port", serve_port, "TCP port");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_option("--store", serve_store, std::string("Event log; ") + kStoreEnv + " overrides it");

  // simulate
  StudyArgs sim_args;
  SimulationOptions sim;
  std::string sim_store, sim_policy = "highlight_follower";
  auto* sim_cmd = app.add_subcommand("simulate", "Run scripted participants against a fresh study");
  add_study_options(sim_cmd, sim_args);
  sim_cmd->add_option("--participants", sim.participants, "Number of agents");
  sim_cmd->add_option("--policy", sim_policy, "highlight_follower, label_follower, ground_truth, coin_flip");
  sim_cmd->add_option("--attention-fail-rate", sim.attention_fail_rate, "Share of agents failing the checks");
  sim_cmd->add_option("--store", sim_store, std::string("Event log (default: in memory); ") + kStoreEnv +
                                                " overrides it");

  // analyze
  std::string an_store, an_out, an_export, an_compare;
  auto* analyze_cmd = app.add_subcommand("analyze", "Report outcome statistics from an event log");
  analyze_cmd->add_option("--store", an_store, std::string("Event log; ") + kStoreEnv + " overrides it");
  analyze_cmd->add_option("--out", an_out, "Report file (default: stdout)");
  analyze_cmd->add_option("--export", an_export, "Response rows as CSV");
  analyze_cmd->add_option("--compare-store", an_compare, "Second log for a pooled outperform test");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      const auto manifest = write_corpus(synthetic_corpus(synth), synth_out);
      std::cout << manifest.string() << '\n';
    } else if (*train_cmd) {
      const auto start = std::chrono::steady_clock::now();
      const auto reviews = load_corpus(train_corpus, pipeline.seed);
      const auto trained = train_pipeline(reviews, pipeline);
      save_pipeline(trained, train_out);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (const auto& w : trained.cv.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "vocabulary " << trained.vocab->size() << "\nC " << trained.cv.chosen_C << "\ntest_accuracy "
                << trained.test_accuracy << "\nseconds " << seconds << '\n';
    } else if (*explain_cmd) {
      const auto loaded = load_model(ex_corpus, ex_model);
      const auto reviews = reviews_for_split(loaded.reviews, ex_split);
      const auto matrix = ex_method == "svm"
                              ? coefficient_matrix(*loaded.model, reviews, *loaded.vocab)
                              : lime_matrix(LinearSvmPredictor(loaded.model, loaded.vocab), reviews, *loaded.vocab,
                                            lime);
      matrix.save(ex_out);
    } else if (*select_cmd) {
      const auto loaded = load_model(sel_corpus, sel_model);
      std::vector<std::string> ids;
      for (const auto& r : loaded.reviews) ids.push_back(r.id);
      const auto matrix = ingest_importance(sel_importance, true, {loaded.vocab->size(), &ids});
      const LinearSvmPredictor predictor(loaded.model, loaded.vocab);
      std::vector<std::string> candidates;
      for (const auto& id : correctly_classified_ids(filter_split(loaded.reviews, Split::train), predictor)) {
        if (matrix.contains(id)) candidates.push_back(id);
      }
      const SelectionProblem problem(matrix, candidates, loaded.vocab->size(), sel_budget);
      TutorialSelection selection;
      switch (parse_selection_method(sel_method)) {
        case SelectionMethod::random: selection = random_select(problem, sel_seed); break;
        case SelectionMethod::sp_lime: selection = greedy_coverage(problem); break;
        case SelectionMethod::spaced_repetition: selection = greedy_sr(problem); break;
      }
      selection.save(sel_out);
      std::cout << "objective " << selection.objective_value << '\n';
    } else if (*build_cmd) {
      const auto guidelines = guidelines_from(bt_guidelines);
      TutorialPlan plan;
      if (bt_kind == "guidelines") {
        plan = assemble_guidelines(guidelines);
      } else {
        if (bt_corpus.empty() || bt_model.empty() || bt_selection.empty() || bt_importance.empty()) {
          throw ValidationError("example tutorials need --corpus, --model-dir, --selection and --importance");
        }
        const auto loaded = load_model(bt_corpus, bt_model);
        std::vector<std::string> ids;
        for (const auto& r : loaded.reviews) ids.push_back(r.id);
        const auto selection = TutorialSelection::load(bt_selection);
        const auto matrix = ingest_importance(bt_importance, true, {loaded.vocab->size(), &ids});
        const LinearSvmPredictor predictor(loaded.model, loaded.vocab);
        const ImportanceSource source{&matrix, loaded.vocab.get()};
        plan = bt_kind == "examples"
                   ? assemble_examples(selection, loaded.reviews, predictor, source)
                   : assemble_combined(guidelines, selection, loaded.reviews, predictor, source);
      }
      plan.save(bt_out);
    } else if (*serve_cmd) {
      const auto materials = materials_from(serve_args);
      const std::string path = store_path(serve_store);
      auto store = std::make_shared<FileEventStore>(path);
      auto platform = std::make_shared<Platform>(
          PlatformConfig{parse_experiment(serve_args.experiment), serve_args.quota, kPredictionItemsPerSession,
                         serve_args.seed},
          materials, store);
      StudyService service(platform);
      httplib::Server server;
      service.mount(server);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "serving " << serve_args.experiment << " on " << serve_host << ':' << serve_port << ", log "
                << path << '\n';
      if (!server.listen(serve_host, serve_port)) {
        std::cerr << "error: cannot listen on " << serve_host << ':' << serve_port << '\n';
        return 1;
      }
    } else if (*sim_cmd) {
      const auto materials = materials_from(sim_args);
      std::shared_ptr<EventStore> store;
      const std::string path = store_path(sim_store);
      if (path.empty()) {
        store = std::make_shared<MemoryEventStore>();
      } else {
        store = std::make_shared<FileEventStore>(path);
      }
      ManualClock clock(1'700'000'000'000);
      Platform platform({parse_experiment(sim_args.experiment), sim_args.quota, kPredictionItemsPerSession,
                         sim_args.seed},
                        materials, store, clock.clock());
      sim.policy = parse_agent_policy(sim_policy);
      sim.seed = sim_args.seed;
      const auto result = run_simulation(platform, clock, sim);
      std::cout << "created " << result.created << "\ncompleted " << result.completed << "\ndisqualified "
                << result.disqualified << "\npremature_rejections " << result.premature_rejections << '/'
                << result.premature_attempts << '\n';
      if (result.enrollment_closed) std::cout << "stopped early: enrollment closed\n";
      std::cout << '\n';
      const auto sessions = platform.sessions();
      std::cout << format_report(analyze(sessions, platform.config().experiment));
    } else if (*analyze_cmd) {
      const std::string path = store_path(an_store);
      if (path.empty()) throw ValidationError(std::string("no event log: pass --store or set ") + kStoreEnv);
      const auto sessions = load_sessions(FileEventStore(path));
      if (sessions.empty()) throw ValidationError("event log " + path + " holds no sessions");
      std::vector<Session> comparison;
      if (!an_compare.empty()) comparison = load_sessions(FileEventStore(an_compare));
      const auto report = format_report(analyze(sessions, sessions.front().condition.experiment, comparison));
      if (an_out.empty()) {
        std::cout << report;
      } else {
        std::ofstream(an_out) << report;
      }
      if (!an_export.empty()) {
        std::ofstream out(an_export);
        write_responses_csv(out, sessions);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
