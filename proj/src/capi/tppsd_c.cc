// Copyright 2026 The tppsd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tppsd/tppsd.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "app/commands.h"
#include "classical/process.h"
#include "classical/process_io.h"
#include "core/error.h"
#include "core/log.h"
#include "core/rng.h"
#include "model/checkpoint.h"
#include "model/model.h"
#include "sampler/sampler.h"
#include "train/trainer.h"

struct tppsd_model {
  tppsd::model::Model model;
};

struct tppsd_process {
  tppsd::classical::GroundTruthProcess process;
};

struct tppsd_sequence {
  tppsd::EventSequence seq;
};

namespace {

thread_local std::string g_last_error;

tppsd_status fail(tppsd_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
tppsd_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return TPPSD_OK;
  } catch (const tppsd::Error& e) {
    return fail(static_cast<tppsd_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TPPSD_ERR_INTERNAL, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(TPPSD_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(TPPSD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TPPSD_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) tppsd::throw_usage(std::string(name) + " must not be NULL");
}

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

tppsd::sampler::RejectionPolicy policy(tppsd_policy p) {
  switch (p) {
    case TPPSD_POLICY_POSITIONWISE:
      return tppsd::sampler::RejectionPolicy::kPositionwise;
    case TPPSD_POLICY_ALG1_LITERAL:
      return tppsd::sampler::RejectionPolicy::kAlg1Literal;
  }
  tppsd::throw_usage("unknown rejection policy");
}

void fill_stats(const tppsd::sampler::SampleRunStats& s, tppsd_sample_stats* out) {
  if (!out) return;
  out->wall_seconds = s.wall_seconds;
  out->events_drafted = s.events_drafted;
  out->events_accepted = s.events_accepted;
  out->target_forwards = s.target_forwards;
  out->draft_forwards = s.draft_forwards;
  out->residual_fallbacks = s.residual_fallbacks;
}

tppsd_warning_fn g_warning_fn = nullptr;
void* g_warning_user = nullptr;

}  // namespace

extern "C" {

const char* tppsd_last_error(void) { return g_last_error.c_str(); }

const char* tppsd_version(void) { return tppsd::app::kToolVersion; }

tppsd_status tppsd_model_load(const char* path, tppsd_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tppsd_model{tppsd::model::Model(tppsd::model::load_checkpoint(path))};
  });
}

void tppsd_model_free(tppsd_model* model) { delete model; }

tppsd_status tppsd_model_num_marks(const tppsd_model* model, int* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = model->model.config().num_marks;
  });
}

tppsd_status tppsd_model_loglik(const tppsd_model* model, const tppsd_sequence* seq,
                                double* out) {
  return guarded([&] {
    require(model, "model");
    require(seq, "seq");
    require(out, "out");
    *out = model->model.sequence_loglik(seq->seq);
  });
}

tppsd_status tppsd_process_load(const char* path, tppsd_process** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tppsd_process{
        tppsd::classical::GroundTruthProcess(tppsd::classical::load_process_params(path))};
  });
}

void tppsd_process_free(tppsd_process* process) { delete process; }

tppsd_status tppsd_process_sample(const tppsd_process* process, double t_end, uint64_t seed,
                                  uint64_t stream, tppsd_sequence** out) {
  return guarded([&] {
    require(process, "process");
    require(out, "out");
    tppsd::RngStream rng(seed, stream);
    *out = new tppsd_sequence{process->process.sample(t_end, rng)};
  });
}

tppsd_status tppsd_process_loglik(const tppsd_process* process, const tppsd_sequence* seq,
                                  double* out) {
  return guarded([&] {
    require(process, "process");
    require(seq, "seq");
    require(out, "out");
    *out = process->process.log_likelihood(seq->seq);
  });
}

tppsd_status tppsd_sequence_create(const double* times, const int* marks, size_t n, double t_end,
                                   tppsd_sequence** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(times, "times");
      require(marks, "marks");
    }
    tppsd::EventSequence seq;
    seq.t_end = t_end;
    for (size_t i = 0; i < n; ++i) seq.events.push_back({times[i], marks[i]});
    const int k = tppsd::infer_num_marks({&seq, 1});
    tppsd::require_valid(seq, k < 1 ? 1 : k);
    *out = new tppsd_sequence{std::move(seq)};
  });
}

void tppsd_sequence_free(tppsd_sequence* seq) { delete seq; }

size_t tppsd_sequence_size(const tppsd_sequence* seq) { return seq ? seq->seq.size() : 0; }

double tppsd_sequence_t_end(const tppsd_sequence* seq) { return seq ? seq->seq.t_end : 0.0; }

tppsd_status tppsd_sequence_event(const tppsd_sequence* seq, size_t index, double* time,
                                  int* mark) {
  return guarded([&] {
    require(seq, "seq");
    if (index >= seq->seq.size()) tppsd::throw_usage("event index out of range");
    if (time) *time = seq->seq.events[index].time;
    if (mark) *mark = seq->seq.events[index].mark;
  });
}

tppsd_status tppsd_sample_ar(const tppsd_model* target, double t_end, uint64_t seed,
                             uint64_t stream, tppsd_sequence** out, tppsd_sample_stats* stats) {
  return guarded([&] {
    require(target, "target");
    require(out, "out");
    tppsd::RngStream rng(seed, stream);
    auto res = tppsd::sampler::ar_sample(target->model, t_end, rng);
    fill_stats(res.stats, stats);
    *out = new tppsd_sequence{std::move(res.sequence)};
  });
}

tppsd_status tppsd_sample_sd(const tppsd_model* target, const tppsd_model* draft, double t_end,
                             int gamma, tppsd_policy p, uint64_t seed, uint64_t stream,
                             tppsd_sequence** out, tppsd_sample_stats* stats) {
  return guarded([&] {
    require(target, "target");
    require(draft, "draft");
    require(out, "out");
    tppsd::RngStream rng(seed, stream);
    tppsd::sampler::SdOptions options;
    options.gamma = gamma;
    options.policy = policy(p);
    auto res = tppsd::sampler::tpp_sd_sample(target->model, draft->model, t_end, options, rng);
    fill_stats(res.stats, stats);
    *out = new tppsd_sequence{std::move(res.sequence)};
  });
}

void tppsd_simulate_options_init(tppsd_simulate_options* o) {
  if (!o) return;
  *o = tppsd_simulate_options{nullptr, 1000, 100.0, 0, nullptr};
}

void tppsd_train_options_init(tppsd_train_options* o) {
  if (!o) return;
  *o = tppsd_train_options{nullptr, nullptr, nullptr, 0, 0, nullptr};
}

void tppsd_sample_options_init(tppsd_sample_options* o) {
  if (!o) return;
  *o = tppsd_sample_options{"ar", nullptr, nullptr, 10, 100.0, 1, 0,
                            TPPSD_POLICY_POSITIONWISE, nullptr};
}

void tppsd_eval_options_init(tppsd_eval_options* o) {
  if (!o) return;
  *o = tppsd_eval_options{"ks",    nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                          nullptr, 100,     100,     10,      0,       nullptr};
}

void tppsd_bench_options_init(tppsd_bench_options* o) {
  if (!o) return;
  static const int kDefaultGammas[] = {1, 5, 10, 20, 40, 60};
  *o = tppsd_bench_options{nullptr, nullptr, kDefaultGammas, 6, 3, 100.0, 0,
                           TPPSD_POLICY_POSITIONWISE, nullptr};
}

tppsd_status tppsd_simulate(const tppsd_simulate_options* o) {
  return guarded([&] {
    require(o, "options");
    if (!o->process_path) tppsd::throw_usage("--params is required");
    tppsd::app::SimulateOptions s;
    s.process = tppsd::classical::load_process_params(o->process_path);
    s.n = static_cast<std::size_t>(o->n);
    s.t_end = o->t_end;
    s.seed = o->seed;
    s.out = str(o->out);
    tppsd::app::run_simulate(s);
  });
}

tppsd_status tppsd_train(const tppsd_train_options* o) {
  return guarded([&] {
    require(o, "options");
    if (!o->model_config_path) tppsd::throw_usage("--model-config is required");
    tppsd::app::TrainOptions t;
    t.data = str(o->data_path);
    if (!t.data.empty() && !std::filesystem::exists(t.data)) {
      tppsd::throw_data("data file not found: " + t.data);
    }
    std::ifstream in(o->model_config_path);
    if (!in) tppsd::throw_data(std::string("cannot open model config ") + o->model_config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    t.model = tppsd::model::config_from_json(buf.str());
    if (o->train_config_path) t.train = tppsd::train::load_train_config(o->train_config_path);
    if (o->has_seed) t.train.seed = o->seed;
    t.out = str(o->out);
    tppsd::app::run_train(t);
  });
}

tppsd_status tppsd_sample(const tppsd_sample_options* o) {
  return guarded([&] {
    require(o, "options");
    tppsd::app::SampleOptions s;
    s.mode = tppsd::app::parse_sample_mode(str(o->mode));
    s.target = str(o->target_path);
    s.draft = str(o->draft_path);
    s.gamma = o->gamma;
    s.t_end = o->t_end;
    s.runs = static_cast<std::size_t>(o->runs);
    s.seed = o->seed;
    s.policy = policy(o->policy);
    s.out = str(o->out);
    tppsd::app::run_sample(s);
  });
}

tppsd_status tppsd_eval(const tppsd_eval_options* o) {
  return guarded([&] {
    require(o, "options");
    tppsd::app::EvalOptions e;
    e.metric = tppsd::app::parse_eval_metric(str(o->metric));
    e.data = str(o->data_path);
    e.process = str(o->process_path);
    e.data_b = str(o->data_b_path);
    e.scorer_a = str(o->scorer_a_path);
    e.scorer_b = str(o->scorer_b_path);
    e.target = str(o->target_path);
    e.draft = str(o->draft_path);
    e.history_length = static_cast<std::size_t>(o->history_length);
    e.repetitions = static_cast<std::size_t>(o->repetitions);
    e.gamma = o->gamma;
    e.seed = o->seed;
    e.out = str(o->out);
    tppsd::app::run_eval(e);
  });
}

tppsd_status tppsd_bench(const tppsd_bench_options* o) {
  return guarded([&] {
    require(o, "options");
    tppsd::app::BenchOptions b;
    b.target = str(o->target_path);
    b.draft = str(o->draft_path);
    if (o->num_gammas > 0) {
      require(o->gammas, "gammas");
      b.gammas.assign(o->gammas, o->gammas + o->num_gammas);
    } else {
      b.gammas.clear();
    }
    b.repetitions = static_cast<std::size_t>(o->repetitions);
    b.t_end = o->t_end;
    b.seed = o->seed;
    b.policy = policy(o->policy);
    b.out = str(o->out);
    tppsd::app::run_bench(b);
  });
}

tppsd_status tppsd_replay(const char* manifest_path, const char* out_dir, int* identical,
                          char** report) {
  return guarded([&] {
    require(manifest_path, "manifest_path");
    require(out_dir, "out_dir");
    const tppsd::app::ReplayReport r = tppsd::app::replay(manifest_path, out_dir);
    if (identical) *identical = r.all_identical() ? 1 : 0;
    if (report) {
      std::ostringstream text;
      for (const auto& c : r.checks) {
        text << (c.identical ? "match" : "DIFFER") << ' ' << c.role << ' ' << c.replayed << ": "
             << c.detail << '\n';
      }
      const std::string s = text.str();
      char* buf = static_cast<char*>(std::malloc(s.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, s.c_str(), s.size() + 1);
      *report = buf;
    }
  });
}

void tppsd_string_free(char* s) { std::free(s); }

void tppsd_set_warning_handler(tppsd_warning_fn fn, void* user_data) {
  g_warning_fn = fn;
  g_warning_user = user_data;
  if (!fn) {
    tppsd::set_warning_sink(tppsd::default_warning_sink());
    return;
  }
  tppsd::set_warning_sink([](std::string_view message) {
    const std::string s(message);
    if (g_warning_fn) g_warning_fn(s.c_str(), g_warning_user);
  });
}

}  // extern "C"
