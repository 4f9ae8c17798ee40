#include "checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace crda {

namespace {

constexpr char kHeader[] = "CRDA-CHECKPOINT v1\n";
constexpr char kTrailer[] = "CRDA-END\n";

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, int64_t v) { put_u64(out, static_cast<uint64_t>(v)); }

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

void put_f64_vec(std::string& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double x : v) put_f64(out, x);
}

void put_adam(std::string& out, const AdamState& a) {
  put_i64(out, a.step);
  put_f64_vec(out, a.m);
  put_f64_vec(out, a.v);
}

void put_rng(std::string& out, const Rng& rng) {
  for (uint64_t w : rng.save_state()) put_u64(out, w);
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  int64_t i64() { return static_cast<int64_t>(u64()); }

  double f64() {
    const uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::vector<double> f64_vec(size_t expected, const char* what) {
    const uint64_t n = u64();
    if (n != expected) {
      throw IoError("checkpoint '" + path_ + "': " + what + " has " + std::to_string(n) +
                    " entries, config expects " + std::to_string(expected));
    }
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }

  AdamState adam(size_t param_count, double lr, double weight_decay, const char* what) {
    AdamState a = adam_init(param_count, lr, weight_decay);
    a.step = i64();
    a.m = f64_vec(param_count, what);
    a.v = f64_vec(param_count, what);
    return a;
  }

  Rng rng() {
    std::array<uint64_t, 4> s{};
    for (uint64_t& w : s) w = u64();
    Rng r;
    r.restore_state(s);
    return r;
  }

  void expect_literal(const char* lit, const char* err) {
    const size_t n = std::strlen(lit);
    need(n);
    if (std::memcmp(bytes_.data() + pos_, lit, n) != 0) {
      throw IoError("checkpoint '" + path_ + "': " + err);
    }
    pos_ += n;
  }

  void expect_end() {
    if (pos_ != bytes_.size()) {
      throw IoError("checkpoint '" + path_ + "': trailing bytes after end marker");
    }
  }

 private:
  void need(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw IoError("checkpoint '" + path_ + "' is truncated");
    }
  }

  std::string bytes_;
  std::string path_;
  size_t pos_ = 0;
};

void check_dim(Reader& r, uint64_t expected, const char* what, const std::string& path) {
  const uint64_t got = r.u64();
  if (got != expected) {
    throw IoError("checkpoint '" + path + "': " + what + " is " + std::to_string(got) +
                  ", config expects " + std::to_string(expected));
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainingState& state,
                     const TrainConfig& cfg) {
  std::string out = kHeader;

  put_u64(out, static_cast<uint64_t>(cfg.engine.latent_dim));
  put_u64(out, static_cast<uint64_t>(cfg.engine.detector_hidden));
  put_u64(out, static_cast<uint64_t>(cfg.engine.policy_hidden));
  put_u64(out, static_cast<uint64_t>(cfg.engine.critic_hidden));
  put_u64(out, static_cast<uint64_t>(cfg.task.feature_dim()));
  put_u64(out, state.queues.capacity());

  put_i64(out, state.next_epoch);
  put_f64(out, state.prev_val_auc);

  put_rng(out, state.data_rng);
  put_rng(out, state.action_rng);
  put_rng(out, state.region_rng);
  put_rng(out, state.state_rng);

  put_f64_vec(out, state.detector.params);
  put_adam(out, state.detector_opt);
  put_f64_vec(out, state.policy.params);
  put_adam(out, state.policy_opt);
  put_f64_vec(out, state.critic.params);
  put_adam(out, state.critic_opt);

  for (int env = 0; env < kNumEnvironments; ++env) {
    const auto entries = state.queues.entries(env);
    put_u64(out, entries.size());
    for (const EnvironmentQueues::Entry& e : entries) {
      put_f64_vec(out, e.sample.features);
      put_i64(out, e.sample.label);
      put_i64(out, e.sample.op_used);
      put_u64(out, e.sample.region_mask);
      put_f64(out, e.sample.region_area);
      put_f64(out, e.entropy);
    }
  }
  out += kTrailer;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp + "' for write");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

TrainingState load_checkpoint(const std::string& path, const TrainConfig& cfg) {
  std::string bytes;
  {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    if (f.bad()) throw IoError("failed reading checkpoint '" + path + "'");
    bytes = buf.str();
  }
  Reader r(std::move(bytes), path);
  r.expect_literal(kHeader, "unsupported format version (expected CRDA-CHECKPOINT v1)");

  check_dim(r, static_cast<uint64_t>(cfg.engine.latent_dim), "latent_dim", path);
  check_dim(r, static_cast<uint64_t>(cfg.engine.detector_hidden), "detector_hidden", path);
  check_dim(r, static_cast<uint64_t>(cfg.engine.policy_hidden), "policy_hidden", path);
  check_dim(r, static_cast<uint64_t>(cfg.engine.critic_hidden), "critic_hidden", path);
  check_dim(r, static_cast<uint64_t>(cfg.task.feature_dim()), "feature_dim", path);
  check_dim(r, static_cast<uint64_t>(cfg.engine.batch_size), "queue capacity", path);

  TrainingState state;
  state.next_epoch = static_cast<int>(r.i64());
  state.prev_val_auc = r.f64();

  state.data_rng = r.rng();
  state.action_rng = r.rng();
  state.region_rng = r.rng();
  state.state_rng = r.rng();

  state.detector.input_dim = cfg.task.feature_dim();
  state.detector.hidden = cfg.engine.detector_hidden;
  state.detector.latent = cfg.engine.latent_dim;
  state.detector.params = r.f64_vec(state.detector.param_count(), "detector parameters");
  state.detector_opt = r.adam(state.detector.params.size(), cfg.engine.detector_lr,
                              cfg.engine.detector_weight_decay, "detector optimizer state");

  state.policy.state_dim = cfg.engine.latent_dim;
  state.policy.hidden = cfg.engine.policy_hidden;
  state.policy.params = r.f64_vec(state.policy.dims().param_count(), "policy parameters");
  state.policy_opt = r.adam(state.policy.params.size(), cfg.ppo.lr, 0.0,
                            "policy optimizer state");

  state.critic.state_dim = cfg.engine.latent_dim;
  state.critic.hidden = cfg.engine.critic_hidden;
  state.critic.params = r.f64_vec(state.critic.dims().param_count(), "critic parameters");
  state.critic_opt = r.adam(state.critic.params.size(), cfg.ppo.lr, 0.0,
                            "critic optimizer state");

  state.queues = EnvironmentQueues(static_cast<size_t>(cfg.engine.batch_size));
  for (int env = 0; env < kNumEnvironments; ++env) {
    const uint64_t count = r.u64();
    if (count > state.queues.capacity()) {
      throw IoError("checkpoint '" + path + "': queue " + std::to_string(env) +
                    " exceeds capacity");
    }
    for (uint64_t i = 0; i < count; ++i) {
      SyntheticSample s;
      s.features = r.f64_vec(static_cast<size_t>(cfg.task.feature_dim()), "queued features");
      s.label = static_cast<int>(r.i64());
      s.op_used = static_cast<int>(r.i64());
      s.region_mask = static_cast<uint8_t>(r.u64());
      s.region_area = r.f64();
      const double entropy = r.f64();
      state.queues.push(env, s, entropy);
    }
  }
  r.expect_literal(kTrailer, "missing end marker");
  r.expect_end();
  return state;
}

}  // namespace crda
