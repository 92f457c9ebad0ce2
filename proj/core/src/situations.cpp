#include <famle/situations.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace famle {

namespace {

constexpr double kPi = std::numbers::pi;

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

void check_state_action(const SituationSpec& spec,
                        const Eigen::Ref<const Eigen::VectorXd>& state,
                        const Eigen::Ref<const Eigen::VectorXd>& action)
{
    if (state.size() != spec.state_dim() || action.size() != spec.action_dim()) {
        throw ConfigError("state/action dimensions do not match the situation family");
    }
    if (!all_finite(state) || !all_finite(action)) {
        throw InputError("non-finite state or action");
    }
}

} // namespace

std::string family_name(Family f)
{
    switch (f) {
        case Family::kSine: return "sine";
        case Family::kArm: return "arm";
        case Family::kPointmass: return "pointmass";
    }
    throw ConfigError("unknown family");
}

Family family_from_name(const std::string& name)
{
    if (name == "sine") return Family::kSine;
    if (name == "arm") return Family::kArm;
    if (name == "pointmass") return Family::kPointmass;
    throw ConfigError("unknown family name: " + name);
}

std::string damage_name(DamageKind k)
{
    switch (k) {
        case DamageKind::kHealthy: return "healthy";
        case DamageKind::kWeakened: return "weakened";
        case DamageKind::kReversed: return "reversed";
        case DamageKind::kBlocked: return "blocked";
    }
    throw ConfigError("unknown damage kind");
}

DamageKind damage_from_name(const std::string& name)
{
    if (name == "healthy") return DamageKind::kHealthy;
    if (name == "weakened") return DamageKind::kWeakened;
    if (name == "reversed") return DamageKind::kReversed;
    if (name == "blocked") return DamageKind::kBlocked;
    throw ConfigError("unknown damage name: " + name);
}

double JointDamage::effective_gain() const
{
    switch (kind) {
        case DamageKind::kHealthy: return 1.0;
        case DamageKind::kWeakened: return gain;
        case DamageKind::kReversed: return -1.0;
        case DamageKind::kBlocked: return 0.0;
    }
    throw ConfigError("unknown damage kind");
}

int SituationSpec::state_dim() const
{
    switch (family) {
        case Family::kSine: return 1;
        case Family::kArm: return static_cast<int>(joints.size()) + 2;
        case Family::kPointmass: return 4;
    }
    throw ConfigError("unknown family");
}

int SituationSpec::action_dim() const
{
    switch (family) {
        case Family::kSine: return 0;
        case Family::kArm: return static_cast<int>(joints.size());
        case Family::kPointmass: return 2;
    }
    throw ConfigError("unknown family");
}

std::vector<DamageKind> SituationSpec::damage_tags() const
{
    std::vector<DamageKind> tags;
    for (const auto& j : joints) tags.push_back(j.kind);
    return tags;
}

double wrap_angle(double x)
{
    double y = std::fmod(x + kPi, 2.0 * kPi);
    if (y <= 0.0) y += 2.0 * kPi;
    return y - kPi;
}

Eigen::Vector2d forward_kinematics(const Eigen::Ref<const Eigen::VectorXd>& angles)
{
    Eigen::Vector2d ee(0.0, 0.0);
    double cum = 0.0;
    for (int j = 0; j < angles.size(); ++j) {
        cum += angles[j];
        ee.x() += std::cos(cum);
        ee.y() += std::sin(cum);
    }
    return ee;
}

Eigen::Vector2d arm_goal(int n_links)
{
    const double c = 0.8 * n_links / std::numbers::sqrt2;
    return {c, c};
}

Eigen::Vector2d pointmass_goal() { return {2.0, 0.0}; }

SituationSpec sample_situation(Family family, std::mt19937_64& rng, int n_joints)
{
    SituationSpec spec;
    spec.family = family;
    switch (family) {
        case Family::kSine: {
            std::uniform_real_distribution<double> amp(0.5, 2.0);
            std::uniform_real_distribution<double> ph(0.0, kPi);
            std::uniform_real_distribution<double> freq(0.5, 2.0);
            spec.amplitude = amp(rng);
            spec.phase = ph(rng);
            spec.frequency = freq(rng);
            break;
        }
        case Family::kArm: {
            if (n_joints < 1) throw ConfigError("arm needs at least one joint");
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            std::uniform_int_distribution<int> which(0, 2);
            std::uniform_real_distribution<double> gain(0.0, 1.0);
            while (true) {
                spec.joints.clear();
                int blocked = 0;
                for (int j = 0; j < n_joints; ++j) {
                    JointDamage d;
                    if (coin(rng) < 0.5) {
                        d.kind = DamageKind::kHealthy;
                    } else {
                        switch (which(rng)) {
                            case 0:
                                d.kind = DamageKind::kWeakened;
                                d.gain = gain(rng);
                                break;
                            case 1: d.kind = DamageKind::kReversed; break;
                            default: d.kind = DamageKind::kBlocked; break;
                        }
                    }
                    if (d.kind == DamageKind::kBlocked) ++blocked;
                    spec.joints.push_back(d);
                }
                if (blocked < n_joints) break; // a fully blocked arm is degenerate
            }
            break;
        }
        case Family::kPointmass: {
            std::uniform_real_distribution<double> fric(0.25, 4.0);
            spec.friction_mult = fric(rng);
            break;
        }
    }
    return spec;
}

Eigen::VectorXd initial_state(const SituationSpec& spec)
{
    switch (spec.family) {
        case Family::kSine: return Eigen::VectorXd::Zero(1);
        case Family::kArm: {
            const int n = static_cast<int>(spec.joints.size());
            Eigen::VectorXd s = Eigen::VectorXd::Zero(n + 2);
            s.tail<2>() = forward_kinematics(s.head(n));
            return s;
        }
        case Family::kPointmass: return Eigen::VectorXd::Zero(4);
    }
    throw ConfigError("unknown family");
}

Eigen::VectorXd random_state(const SituationSpec& spec, std::mt19937_64& rng)
{
    switch (spec.family) {
        case Family::kSine: {
            std::uniform_real_distribution<double> x(kSineInputLow, kSineInputHigh);
            return Eigen::VectorXd::Constant(1, x(rng));
        }
        case Family::kArm: {
            const int n = static_cast<int>(spec.joints.size());
            std::uniform_real_distribution<double> ang(-kPi, kPi);
            Eigen::VectorXd s(n + 2);
            for (int j = 0; j < n; ++j) s[j] = ang(rng);
            s.tail<2>() = forward_kinematics(s.head(n));
            return s;
        }
        case Family::kPointmass: {
            std::uniform_real_distribution<double> pos(-2.5, 2.5);
            std::uniform_real_distribution<double> vel(-1.0, 1.0);
            Eigen::VectorXd s(4);
            s << pos(rng), pos(rng), vel(rng), vel(rng);
            return s;
        }
    }
    throw ConfigError("unknown family");
}

Eigen::VectorXd step(const SituationSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& state,
                     const Eigen::Ref<const Eigen::VectorXd>& action)
{
    check_state_action(spec, state, action);
    switch (spec.family) {
        case Family::kSine: {
            Eigen::VectorXd next(1);
            next[0] = spec.amplitude * std::sin(spec.frequency * state[0] + spec.phase);
            return next;
        }
        case Family::kArm: {
            const int n = static_cast<int>(spec.joints.size());
            Eigen::VectorXd next(n + 2);
            for (int j = 0; j < n; ++j) {
                // commanded displacement first, then the damage gain, so a
                // weakened joint moves exactly gain times the healthy step
                const double base = clip(action[j], -1.0, 1.0) * kEnvDt;
                next[j] = wrap_angle(state[j] + spec.joints[j].effective_gain() * base);
            }
            next.tail<2>() = forward_kinematics(next.head(n));
            return next;
        }
        case Family::kPointmass: {
            Eigen::Vector2d p = state.head<2>();
            Eigen::Vector2d v = state.tail<2>();
            Eigen::Vector2d a(clip(action[0], -1.0, 1.0), clip(action[1], -1.0, 1.0));
            const double drag = 1.0 - kPointmassMu * spec.friction_mult * kEnvDt;
            v = drag * v + a * kEnvDt;
            p = p + v * kEnvDt;
            Eigen::VectorXd next(4);
            next << p, v;
            return next;
        }
    }
    throw ConfigError("unknown family");
}

TransitionDataset collect_random_dataset(const SituationSpec& spec,
                                         const CollectionConfig& cfg)
{
    if (cfg.n_transitions < 1) throw ConfigError("collection needs n_transitions >= 1");
    if (cfg.action_low >= cfg.action_high) throw ConfigError("bad action bounds");
    std::mt19937_64 rng = rng_stream(cfg.rng_seed, 0xc0117ec7);

    TransitionDataset ds;
    ds.transitions.reserve(cfg.n_transitions);

    if (spec.family == Family::kSine) {
        std::uniform_real_distribution<double> x(kSineInputLow, kSineInputHigh);
        for (int i = 0; i < cfg.n_transitions; ++i) {
            Transition t;
            t.state = Eigen::VectorXd::Constant(1, x(rng));
            t.action = Eigen::VectorXd(0);
            t.next_state = step(spec, t.state, t.action);
            ds.transitions.push_back(std::move(t));
        }
        return ds;
    }

    std::uniform_real_distribution<double> act(cfg.action_low, cfg.action_high);
    Eigen::VectorXd state;
    for (int i = 0; i < cfg.n_transitions; ++i) {
        if (i % kCollectResetPeriod == 0) state = random_state(spec, rng);
        Transition t;
        t.state = state;
        t.action = Eigen::VectorXd::NullaryExpr(spec.action_dim(),
                                                [&](Eigen::Index) { return act(rng); });
        t.next_state = step(spec, t.state, t.action);
        state = t.next_state;
        ds.transitions.push_back(std::move(t));
    }
    return ds;
}

double reward(Family family, const Eigen::Ref<const Eigen::VectorXd>& state,
              const Eigen::Ref<const Eigen::VectorXd>& action,
              const Eigen::Ref<const Eigen::VectorXd>& next_state)
{
    (void)state;
    (void)action;
    switch (family) {
        case Family::kSine:
            throw UsageError("the sine family is reward-free");
        case Family::kArm: {
            const int n_links = static_cast<int>(next_state.size()) - 2;
            if (n_links < 1) throw ConfigError("arm state too short");
            return -(next_state.tail<2>() - arm_goal(n_links)).norm();
        }
        case Family::kPointmass: {
            if (next_state.size() != 4) throw ConfigError("pointmass state must be 4-D");
            return -(next_state.head<2>() - pointmass_goal()).norm();
        }
    }
    throw ConfigError("unknown family");
}

// ---- persistence ----

namespace {

void append_number(std::string& out, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

void save_dataset_csv(const std::string& path, const TransitionDataset& ds)
{
    if (ds.empty()) throw UsageError("refusing to write an empty dataset");
    std::ofstream f(path);
    if (!f) throw IoError("cannot open dataset for writing: " + path);

    const int sd = static_cast<int>(ds.transitions.front().state.size());
    const int ad = static_cast<int>(ds.transitions.front().action.size());
    std::string line;
    for (int i = 0; i < sd; ++i) line += "s_" + std::to_string(i) + ",";
    for (int i = 0; i < ad; ++i) line += "a_" + std::to_string(i) + ",";
    for (int i = 0; i < sd; ++i) line += "ns_" + std::to_string(i) + ",";
    line.pop_back();
    f << line << "\n";

    for (const auto& t : ds.transitions) {
        line.clear();
        for (int i = 0; i < sd; ++i) {
            append_number(line, t.state[i]);
            line += ",";
        }
        for (int i = 0; i < ad; ++i) {
            append_number(line, t.action[i]);
            line += ",";
        }
        for (int i = 0; i < sd; ++i) {
            append_number(line, t.next_state[i]);
            line += ",";
        }
        line.pop_back();
        f << line << "\n";
    }
    if (!f) throw IoError("failed writing dataset: " + path);
}

TransitionDataset load_dataset_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset: " + path);

    std::string header;
    if (!std::getline(f, header)) throw IoError("empty dataset file: " + path);
    int sd = 0, ad = 0;
    {
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("s_", 0) == 0) ++sd;
            else if (col.rfind("a_", 0) == 0) ++ad;
            else if (col.rfind("ns_", 0) != 0) throw IoError("bad dataset header: " + col);
        }
    }
    if (sd < 1) throw IoError("dataset header has no state columns");

    TransitionDataset ds;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != 2 * sd + ad) {
            throw IoError("dataset row has wrong arity: " + path);
        }
        Transition t;
        t.state = Eigen::Map<Eigen::VectorXd>(vals.data(), sd);
        t.action = Eigen::Map<Eigen::VectorXd>(vals.data() + sd, ad);
        t.next_state = Eigen::Map<Eigen::VectorXd>(vals.data() + sd + ad, sd);
        ds.transitions.push_back(std::move(t));
    }
    if (ds.empty()) throw IoError("dataset file has no rows: " + path);
    return ds;
}

std::string spec_to_json(const SituationSpec& spec)
{
    nlohmann::json j;
    j["family"] = family_name(spec.family);
    switch (spec.family) {
        case Family::kSine:
            j["amplitude"] = spec.amplitude;
            j["phase"] = spec.phase;
            j["frequency"] = spec.frequency;
            break;
        case Family::kArm: {
            nlohmann::json joints = nlohmann::json::array();
            for (const auto& d : spec.joints) {
                nlohmann::json jd;
                jd["kind"] = damage_name(d.kind);
                if (d.kind == DamageKind::kWeakened) jd["gain"] = d.gain;
                joints.push_back(jd);
            }
            j["joints"] = joints;
            break;
        }
        case Family::kPointmass: j["friction_mult"] = spec.friction_mult; break;
    }
    return j.dump(2);
}

SituationSpec spec_from_json(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("malformed situation spec: ") + e.what());
    }
    SituationSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    switch (spec.family) {
        case Family::kSine:
            spec.amplitude = j.at("amplitude").get<double>();
            spec.phase = j.at("phase").get<double>();
            spec.frequency = j.at("frequency").get<double>();
            break;
        case Family::kArm:
            for (const auto& jd : j.at("joints")) {
                JointDamage d;
                d.kind = damage_from_name(jd.at("kind").get<std::string>());
                if (d.kind == DamageKind::kWeakened) d.gain = jd.at("gain").get<double>();
                spec.joints.push_back(d);
            }
            if (spec.joints.empty()) throw IoError("arm spec without joints");
            break;
        case Family::kPointmass:
            spec.friction_mult = j.at("friction_mult").get<double>();
            break;
    }
    return spec;
}

void save_spec_json(const std::string& path, const SituationSpec& spec)
{
    std::ofstream f(path);
    if (!f) throw IoError("cannot open spec for writing: " + path);
    f << spec_to_json(spec) << "\n";
    if (!f) throw IoError("failed writing spec: " + path);
}

SituationSpec load_spec_json(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw IoError("cannot open spec: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return spec_from_json(buf.str());
}

} // namespace famle
