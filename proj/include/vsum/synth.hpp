#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace vsum {

struct DatasetFile;

// Motion regimes of the simulated objects. Fast and turning are the
// anomalous ones the ground truth marks.
enum class Regime { Waiting = 0, Slow = 1, Fast = 2, Turning = 3 };

const char* regime_name(Regime r);
bool regime_is_anomalous(Regime r);

struct SynthConfig {
    std::uint64_t seed = 0;
    int n_objects = 20;
    int frames = 3000;
    // waiting / slow / fast / turning. Within the common and anomalous
    // groups objects are assigned proportionally to these weights; the split
    // between the groups is anomaly_fraction.
    std::array<double, 4> regime_mix = {0.4, 0.3, 0.2, 0.1};
    double anomaly_fraction = 0.25;
    int feature_dim = 64; // even: appearance block then context block
    double noise_sigma = 0.05;

    void validate() const;
};

// Deterministic trajectory simulator. Appearance features come from fixed
// per-regime prototype vectors and context features from a fixed projection
// of the box location, both independent of the dataset seed so that separate
// datasets share the same feature space. Ground truth marks the full
// trajectory of every anomalous-regime object.
DatasetFile synthesize(const SynthConfig& cfg);

} // namespace vsum
