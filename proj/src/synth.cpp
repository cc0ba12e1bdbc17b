#include "vsum/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "vsum/io.hpp"

namespace vsum {

namespace {

constexpr double kSceneW = 1000.0;
constexpr double kSceneH = 1000.0;

// Feature-space constants are seeded independently of the dataset seed so
// offline and test datasets describe objects in the same space.
constexpr std::uint64_t kPrototypeSeed = 0x70726F746FULL;
constexpr std::uint64_t kContextSeed = 0x636F6E7465ULL;

Vec regime_prototype(Regime r, int dim) {
    Rng rng(Rng::mix(kPrototypeSeed, static_cast<std::uint64_t>(r)));
    Vec proto(dim);
    for (int d = 0; d < dim; ++d) proto[d] = rng.uniform(0.2, 1.0);
    return proto;
}

// Fixed projection from normalized box geometry to the context block.
Mat context_projection(int dim) {
    Rng rng(Rng::mix(kContextSeed, static_cast<std::uint64_t>(dim)));
    Mat proj(dim, 4);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < 4; ++c) proj(r, c) = rng.uniform(-0.7, 0.7);
    return proj;
}

Regime draw_regime(Rng& rng, const SynthConfig& cfg) {
    const bool anomalous = rng.uniform01() < cfg.anomaly_fraction;
    const double w0 = anomalous ? cfg.regime_mix[2] : cfg.regime_mix[0];
    const double w1 = anomalous ? cfg.regime_mix[3] : cfg.regime_mix[1];
    const double total = w0 + w1;
    const double u = rng.uniform01();
    const bool first = total > 0.0 ? u < w0 / total : u < 0.5;
    if (anomalous) return first ? Regime::Fast : Regime::Turning;
    return first ? Regime::Waiting : Regime::Slow;
}

struct MotionState {
    double cx, cy;
    double vx, vy;
};

// Advances one frame, reflecting off the scene walls.
void advance(MotionState& s, double half_w, double half_h) {
    s.cx += s.vx;
    s.cy += s.vy;
    if (s.cx < half_w) {
        s.cx = 2.0 * half_w - s.cx;
        s.vx = -s.vx;
    } else if (s.cx > kSceneW - half_w) {
        s.cx = 2.0 * (kSceneW - half_w) - s.cx;
        s.vx = -s.vx;
    }
    if (s.cy < half_h) {
        s.cy = 2.0 * half_h - s.cy;
        s.vy = -s.vy;
    } else if (s.cy > kSceneH - half_h) {
        s.cy = 2.0 * (kSceneH - half_h) - s.cy;
        s.vy = -s.vy;
    }
}

} // namespace

const char* regime_name(Regime r) {
    switch (r) {
    case Regime::Waiting: return "waiting";
    case Regime::Slow: return "slow";
    case Regime::Fast: return "fast";
    case Regime::Turning: return "turning";
    }
    return "unknown";
}

bool regime_is_anomalous(Regime r) { return r == Regime::Fast || r == Regime::Turning; }

void SynthConfig::validate() const {
    if (n_objects < 1) throw std::invalid_argument("n_objects must be >= 1");
    if (frames < 1) throw std::invalid_argument("frames must be >= 1");
    double sum = 0.0;
    for (double p : regime_mix) {
        if (p < 0.0) throw std::invalid_argument("regime_mix entries must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("regime_mix must sum to 1");
    if (anomaly_fraction < 0.0 || anomaly_fraction > 1.0)
        throw std::invalid_argument("anomaly_fraction must lie in [0,1]");
    if (feature_dim < 2 || feature_dim % 2 != 0)
        throw std::invalid_argument("feature_dim must be even and >= 2");
    if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
}

DatasetFile synthesize(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int d_app = cfg.feature_dim / 2;
    const int d_ctx = cfg.feature_dim - d_app;
    const std::array<Vec, 4> prototypes = {
        regime_prototype(Regime::Waiting, d_app), regime_prototype(Regime::Slow, d_app),
        regime_prototype(Regime::Fast, d_app), regime_prototype(Regime::Turning, d_app)};
    const Mat ctx_proj = context_projection(d_ctx);

    DatasetFile ds;
    ds.feature_dim = cfg.feature_dim;
    ds.total_frames = cfg.frames;

    for (int obj = 0; obj < cfg.n_objects; ++obj) {
        const Regime regime = draw_regime(rng, cfg);
        const int max_len = std::min(cfg.frames, 220);
        const int min_len = std::min(cfg.frames, 120);
        const int len = static_cast<int>(rng.range(min_len, max_len));
        const int start = static_cast<int>(rng.range(0, cfg.frames - len));

        const double w = rng.uniform(40.0, 80.0);
        const double h = rng.uniform(40.0, 80.0);
        MotionState s;
        s.cx = rng.uniform(100.0, kSceneW - 100.0);
        s.cy = rng.uniform(100.0, kSceneH - 100.0);
        double speed = 0.0;
        switch (regime) {
        case Regime::Waiting: speed = 0.0; break;
        case Regime::Slow: speed = rng.uniform(0.5, 1.5); break;
        case Regime::Fast: speed = rng.uniform(8.0, 12.0); break;
        case Regime::Turning: speed = rng.uniform(3.5, 6.0); break;
        }
        double theta = rng.uniform(0.0, 2.0 * M_PI);
        // Turning objects change heading at the trajectory midpoint.
        const double turn_delta =
            (rng.uniform01() < 0.5 ? 1.0 : -1.0) * rng.uniform(M_PI / 2.0, 0.95 * M_PI);
        s.vx = speed * std::cos(theta);
        s.vy = speed * std::sin(theta);

        Trajectory traj;
        traj.object_id = obj;
        traj.f_start = start;
        traj.f_end = start + len - 1;
        traj.regime = regime_name(regime);
        traj.boxes.reserve(len);
        traj.features.reserve(len);
        for (int t = 0; t < len; ++t) {
            if (t > 0) {
                if (regime == Regime::Turning && t == len / 2) {
                    theta += turn_delta;
                    s.vx = speed * std::cos(theta);
                    s.vy = speed * std::sin(theta);
                }
                advance(s, w / 2.0, h / 2.0);
            }
            BoundingBox box{s.cx - w / 2.0, s.cy - h / 2.0, w, h};
            traj.boxes.push_back(box);

            Vec feat(cfg.feature_dim);
            const Vec& proto = prototypes[static_cast<std::size_t>(regime)];
            Eigen::Vector4d loc(s.cx / kSceneW, s.cy / kSceneH, w / std::sqrt(kSceneW * kSceneH),
                                h / std::sqrt(kSceneW * kSceneH));
            const Vec ctx = ctx_proj * loc;
            for (int d = 0; d < d_app; ++d) feat[d] = proto[d] + rng.normal(0.0, cfg.noise_sigma);
            for (int d = 0; d < d_ctx; ++d)
                feat[d_app + d] = ctx[d] + rng.normal(0.0, cfg.noise_sigma);
            traj.features.push_back(std::move(feat));
        }

        if (regime_is_anomalous(regime)) {
            GroundTruthClip gt;
            gt.f_start = traj.f_start;
            gt.f_end = traj.f_end;
            gt.b_start = traj.boxes.front();
            gt.b_end = traj.boxes.back();
            ds.ground_truth.push_back(gt);
        }
        ds.trajectories.push_back(std::move(traj));
    }
    return ds;
}

} // namespace vsum
