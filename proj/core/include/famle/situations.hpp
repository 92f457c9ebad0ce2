#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <famle/common.hpp>
#include <famle/model.hpp>

namespace famle {

// Analytic situation-parameterized environments standing in for a physics
// simulator. A situation c is a concrete dynamics drawn from a family:
//   sine      - 1-D regression task cast as zero-action dynamics
//   arm       - planar velocity-controlled arm with per-joint damages
//   pointmass - 2-D point mass on variable-friction terrain

enum class Family { kSine, kArm, kPointmass };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

enum class DamageKind { kHealthy, kWeakened, kReversed, kBlocked };

std::string damage_name(DamageKind k);
DamageKind damage_from_name(const std::string& name);

struct JointDamage {
    DamageKind kind = DamageKind::kHealthy;
    double gain = 1.0; // only meaningful for kWeakened

    // velocity gain applied to the commanded joint velocity
    double effective_gain() const;
    bool operator==(const JointDamage&) const = default;
};

struct SituationSpec {
    Family family = Family::kSine;

    // sine: next_state = amplitude * sin(frequency * x + phase)
    double amplitude = 1.0;
    double phase = 0.0;
    double frequency = 1.0;

    // arm
    std::vector<JointDamage> joints;

    // pointmass
    double friction_mult = 1.0;

    int state_dim() const;
    int action_dim() const;

    // damage tags ignoring weakened gains; used for held-out collision checks
    std::vector<DamageKind> damage_tags() const;
};

struct CollectionConfig {
    int n_transitions = 100;
    std::uint64_t rng_seed = 0;
    double action_low = -1.0;
    double action_high = 1.0;
};

// integration step, shared by arm and pointmass
inline constexpr double kEnvDt = 0.1;
// pointmass friction coefficient (scaled by the situation's multiplier)
inline constexpr double kPointmassMu = 0.5;
// episode reset period during random-action collection
inline constexpr int kCollectResetPeriod = 50;
// sine inputs are drawn uniformly from this interval
inline constexpr double kSineInputLow = -5.0;
inline constexpr double kSineInputHigh = 5.0;

double wrap_angle(double x); // to (-pi, pi]

// planar end-effector position for unit link lengths
Eigen::Vector2d forward_kinematics(const Eigen::Ref<const Eigen::VectorXd>& angles);

// goal positions of the reward functions
Eigen::Vector2d arm_goal(int n_links);
Eigen::Vector2d pointmass_goal();

SituationSpec sample_situation(Family family, std::mt19937_64& rng, int n_joints = 2);

Eigen::VectorXd initial_state(const SituationSpec& spec);
Eigen::VectorXd random_state(const SituationSpec& spec, std::mt19937_64& rng);

// ground-truth transition function; actions are clipped to [-1, 1] before
// integration (sine ignores the action entirely)
Eigen::VectorXd step(const SituationSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& state,
                     const Eigen::Ref<const Eigen::VectorXd>& action);

// n transitions from uniformly random actions; arm/pointmass episodes reset
// to a uniformly random state every kCollectResetPeriod steps
TransitionDataset collect_random_dataset(const SituationSpec& spec,
                                         const CollectionConfig& cfg);

// negative distance to the family goal, measured at next_state; the sine
// family is reward-free and throws UsageError
double reward(Family family, const Eigen::Ref<const Eigen::VectorXd>& state,
              const Eigen::Ref<const Eigen::VectorXd>& action,
              const Eigen::Ref<const Eigen::VectorXd>& next_state);

// ---- persistence ----
// datasets as CSV with header s_0..,a_0..,ns_0..; specs as sidecar JSON
void save_dataset_csv(const std::string& path, const TransitionDataset& ds);
TransitionDataset load_dataset_csv(const std::string& path);

std::string spec_to_json(const SituationSpec& spec);
SituationSpec spec_from_json(const std::string& text);
void save_spec_json(const std::string& path, const SituationSpec& spec);
SituationSpec load_spec_json(const std::string& path);

} // namespace famle
