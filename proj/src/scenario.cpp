#include "specann/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "specann/errors.hpp"

namespace specann {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string escape_pointer(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

// JSON pointer -> line of the key (or array element) in the source text. The
// text has already been accepted by the parser, so the walk can be lenient.
class LineIndex {
public:
    explicit LineIndex(const std::string& text) : s_(text) {
        skip();
        value("");
    }
    std::optional<int> line(const std::string& pointer) const {
        auto it = lines_.find(pointer);
        if (it == lines_.end()) return std::nullopt;
        return it->second;
    }

private:
    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
    std::map<std::string, int> lines_;

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }
    std::string string() {
        std::string out;
        ++i_;  // opening quote
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\') {
                ++i_;
                if (i_ < s_.size() && s_[i_] != 'u') out += s_[i_] == 'n' ? '\n' : s_[i_];
                ++i_;
                continue;
            }
            out += s_[i_++];
        }
        ++i_;
        return out;
    }
    void value(const std::string& ptr) {
        if (!lines_.count(ptr)) lines_[ptr] = line_;
        if (i_ >= s_.size()) return;
        const char c = s_[i_];
        if (c == '{') {
            ++i_;
            skip();
            while (i_ < s_.size() && s_[i_] != '}') {
                const int key_line = line_;
                const std::string child = ptr + "/" + escape_pointer(string());
                lines_[child] = key_line;
                skip();
                ++i_;  // colon
                skip();
                value(child);
                skip();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip();
            }
            ++i_;
        } else if (c == '[') {
            ++i_;
            skip();
            for (int k = 0; i_ < s_.size() && s_[i_] != ']'; ++k) {
                value(ptr + "/" + std::to_string(k));
                skip();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip();
            }
            ++i_;
        } else if (c == '"') {
            string();
        } else {
            while (i_ < s_.size() && !std::strchr(",]} \t\r\n", s_[i_])) ++i_;
        }
    }
};

// Strict reader over one JSON object: every key must be consumed.
class Reader {
public:
    Reader(const json& j, std::string ptr, const LineIndex* index) : j_(j), ptr_(std::move(ptr)), index_(index) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what, const std::string& sub = "") const { fail_at(ptr_ + sub, what); }
    [[noreturn]] void fail_at(const std::string& ptr, const std::string& what) const {
        std::string where = ptr.empty() ? "/" : ptr;
        if (index_)
            if (auto l = index_->line(ptr)) where += " (line " + std::to_string(*l) + ")";
        throw ConfigError("config error at " + where + ": " + what);
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    std::string at(const std::string& k) const { return ptr_ + "/" + escape_pointer(k); }

    const json& get(const std::string& k) {
        if (!j_.contains(k)) fail("missing required key \"" + k + "\"");
        used_.insert(k);
        return j_.at(k);
    }
    double number(const std::string& k) {
        const json& v = get(k);
        if (!v.is_number()) fail_at(at(k), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail_at(at(k), "expected a finite number");
        return x;
    }
    double number(const std::string& k, double dflt) { return has(k) ? number(k) : dflt; }
    long long integer(const std::string& k, long long lo, long long hi) {
        const json& v = get(k);
        if (!v.is_number_integer()) fail_at(at(k), "expected an integer");
        const long long x = v.get<long long>();
        if (x < lo || x > hi) fail_at(at(k), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return x;
    }
    std::string string(const std::string& k) {
        const json& v = get(k);
        if (!v.is_string()) fail_at(at(k), "expected a string");
        return v.get<std::string>();
    }
    bool boolean(const std::string& k) {
        const json& v = get(k);
        if (!v.is_boolean()) fail_at(at(k), "expected true or false");
        return v.get<bool>();
    }
    const json& array(const std::string& k) {
        const json& v = get(k);
        if (!v.is_array()) fail_at(at(k), "expected an array");
        return v;
    }
    Reader object(const std::string& k) {
        get(k);
        return Reader(j_.at(k), at(k), index_);
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) fail_at(at(k), "unknown key \"" + k + "\"");
    }
    const std::string& pointer() const { return ptr_; }
    const LineIndex* index() const { return index_; }

private:
    const json& j_;
    std::string ptr_;
    const LineIndex* index_;
    std::set<std::string> used_;
};

Intervals read_intervals(const Reader& parent, const json& arr, const std::string& ptr) {
    Intervals out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = ptr + "/" + std::to_string(i);
        const json& e = arr[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            parent.fail_at(p, "expected an interval [lo, hi]");
        const double a = e[0].get<double>(), b = e[1].get<double>();
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) parent.fail_at(p, "interval needs finite lo < hi");
        out.emplace_back(a, b);
    }
    return out;
}

void check_ladder(const std::vector<double>& ladder, const std::function<void(const std::string&)>& fail) {
    if (ladder.size() < 2) fail("eps ladder needs at least two values");
    if (ladder.size() > 50) fail("eps ladder has more than 50 values");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0 && ladder[i] <= 1.0)) fail("eps ladder values must lie in (0, 1]");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) fail("eps ladder must be strictly decreasing");
    }
}

// Cantor depth needed for leaves to undercut the smallest smoothing scale.
int required_depth(const ScPiece& p, double eps_min) {
    return static_cast<int>(std::ceil(std::log(10.0 * (p.hi - p.lo) / eps_min) / std::log(1.0 / p.ratio)));
}

void validate_cross(const Scenario& s, const LineIndex* index) {
    Reader dummy(json::object(), "", index);
    const SpectralMeasure& mu = s.measure;
    const auto& sc = mu.sc_pieces();
    for (std::size_t i = 0; i < sc.size(); ++i) {
        const int d = required_depth(sc[i], s.eps_ladder.back());
        if (d > sc[i].max_depth)
            dummy.fail_at("/measure/sc_pieces/" + std::to_string(i),
                          "Cantor depth " + std::to_string(d) + " is needed for eps = " + num(s.eps_ladder.back()) +
                              " but max_depth is " + std::to_string(sc[i].max_depth));
    }
    if (s.mode == AnnihilatorMode::thm2) {
        for (const auto& c : mu.components()) {
            const auto [a, b] = mu.component_interval(c);
            if (b >= -s.delta0 && a <= s.delta0)
                dummy.fail_at("/region/delta0", "mode thm2 requires a spectral gap [-delta0, delta0] around 0, but the "
                                                "support meets it on [" + num(a) + ", " + num(b) + "]");
        }
        for (std::size_t i = 0; i < sc.size(); ++i)
            if (sc[i].hi > -s.delta0)
                dummy.fail_at("/measure/sc_pieces/" + std::to_string(i),
                              "mode thm2 needs every singular continuous piece left of -delta0");
        for (std::size_t i = 0; i < s.omega.size(); ++i)
            if (s.omega[i].second > 0.0)
                dummy.fail_at("/region/omega/" + std::to_string(i), "derealization set must lie in (-inf, 0]");
        if (mu.hull().first > -s.delta0)
            dummy.fail_at("/region/delta0", "mode thm2 needs spectrum left of the gap to classify");
    } else {
        const auto [lo, hi] = mu.hull();
        const double pad = std::max(1.0, 0.1 * (hi - lo));
        for (std::size_t i = 0; i < s.delta.size(); ++i)
            if (s.delta[i].first < lo - pad || s.delta[i].second > hi + pad)
                dummy.fail_at("/region/delta/" + std::to_string(i),
                              "interval leaves the inflated support hull [" + num(lo - pad) + ", " + num(hi + pad) + "]");
    }
}

Scenario parse(const json& root, const LineIndex* index) {
    Scenario s;
    Reader top(root, "", index);
    const std::string schema = top.string("schema");
    if (schema != kScenarioSchema) top.fail_at("/schema", "unsupported schema \"" + schema + "\" (expected \"" +
                                                              std::string(kScenarioSchema) + "\")");
    s.id = top.string("id");
    if (s.id.empty() || !std::all_of(s.id.begin(), s.id.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
        }))
        top.fail_at("/id", "id must be non-empty and use only letters, digits, '_' and '-'");

    // measure
    {
        Reader m = top.object("measure");
        std::vector<Atom> atoms;
        std::vector<AcPiece> ac;
        std::vector<ScPiece> sc;
        if (m.has("atoms")) {
            const json& arr = m.array("atoms");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader a(arr[i], m.at("atoms") + "/" + std::to_string(i), index);
                Atom at{a.number("position"), a.number("weight")};
                if (!(at.weight > 0.0)) a.fail("weight must be positive", "/weight");
                a.finish();
                atoms.push_back(at);
            }
        }
        if (m.has("ac_pieces")) {
            const json& arr = m.array("ac_pieces");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader a(arr[i], m.at("ac_pieces") + "/" + std::to_string(i), index);
                AcPiece p;
                p.lo = a.number("lo");
                p.hi = a.number("hi");
                if (!(p.lo < p.hi)) a.fail("needs lo < hi");
                const json& d = a.array("density");
                if (d.empty() || d.size() > 8) a.fail("density needs 1 to 8 coefficients", "/density");
                for (const auto& c : d) {
                    if (!c.is_number()) a.fail("density coefficients must be numbers", "/density");
                    p.density.push_back(c.get<double>());
                }
                a.finish();
                ac.push_back(std::move(p));
            }
        }
        if (m.has("sc_pieces")) {
            const json& arr = m.array("sc_pieces");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader a(arr[i], m.at("sc_pieces") + "/" + std::to_string(i), index);
                ScPiece p;
                p.lo = a.number("lo");
                p.hi = a.number("hi");
                if (!(p.lo < p.hi)) a.fail("needs lo < hi");
                p.ratio = a.number("ratio", 1.0 / 3.0);
                if (!(p.ratio > 0.0 && p.ratio < 0.5)) a.fail("ratio must lie in (0, 0.5)", "/ratio");
                p.p = a.number("p", 0.5);
                if (!(p.p > 0.0 && p.p < 1.0)) a.fail("p must lie in (0, 1)", "/p");
                p.mass = a.number("mass", 1.0);
                if (!(p.mass > 0.0)) a.fail("mass must be positive", "/mass");
                if (a.has("max_depth")) p.max_depth = static_cast<int>(a.integer("max_depth", 1, 24));
                a.finish();
                sc.push_back(p);
            }
        }
        m.finish();
        if (atoms.empty() && ac.empty() && sc.empty()) m.fail("measure has no components");
        try {
            s.measure = SpectralMeasure(std::move(atoms), std::move(ac), std::move(sc));
        } catch (const std::exception& e) {
            m.fail(e.what());
        }
    }

    if (top.has("coupling")) {
        Reader c = top.object("coupling");
        s.rank = static_cast<int>(c.integer("rank", 1, 2));
        s.strengths.assign(static_cast<std::size_t>(s.rank), 1.0);
        if (c.has("strengths")) {
            const json& arr = c.array("strengths");
            if (arr.size() != static_cast<std::size_t>(s.rank)) c.fail("needs one strength per rank", "/strengths");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_number() || !(arr[i].get<double>() > 0.0))
                    c.fail("strengths must be positive numbers", "/strengths/" + std::to_string(i));
                s.strengths[i] = arr[i].get<double>();
            }
        }
        c.finish();
    }

    const std::string mode = top.string("mode");
    if (mode == "thm2") s.mode = AnnihilatorMode::thm2;
    else if (mode == "thm3") s.mode = AnnihilatorMode::thm3;
    else top.fail_at("/mode", "mode must be \"thm2\" (gap construction) or \"thm3\" (bump construction)");

    {
        if (!top.has("region"))
            top.fail(s.mode == AnnihilatorMode::thm2 ? "mode thm2 requires region.delta0, the half-width of the spectral "
                                                       "gap around 0"
                                                     : "mode thm3 requires region.delta, the target intervals");
        Reader r = top.object("region");
        if (s.mode == AnnihilatorMode::thm2) {
            if (!r.has("delta0")) r.fail("mode thm2 requires delta0, the half-width of the spectral gap around 0");
            if (r.has("delta")) r.fail_at(r.at("delta"), "delta is only valid in mode thm3");
            s.delta0 = r.number("delta0");
            if (!(s.delta0 > 0.0)) r.fail("delta0 must be positive", "/delta0");
            if (r.has("omega")) s.omega = read_intervals(r, r.array("omega"), r.at("omega"));
        } else {
            if (r.has("delta0")) r.fail_at(r.at("delta0"), "delta0 is only valid in mode thm2");
            if (r.has("omega")) r.fail_at(r.at("omega"), "omega is only valid in mode thm2");
            s.delta = read_intervals(r, r.array("delta"), r.at("delta"));
            if (s.delta.empty()) r.fail("delta needs at least one interval", "/delta");
        }
        r.finish();
    }

    if (top.has("numerics")) {
        Reader n = top.object("numerics");
        if (n.has("eps_ladder")) {
            const json& arr = n.array("eps_ladder");
            std::vector<double> l;
            for (const auto& e : arr) {
                if (!e.is_number()) n.fail("eps ladder values must be numbers", "/eps_ladder");
                l.push_back(e.get<double>());
            }
            check_ladder(l, [&](const std::string& w) { n.fail(w, "/eps_ladder"); });
            s.eps_ladder = std::move(l);
        }
        if (n.has("grid")) s.grid = static_cast<int>(n.integer("grid", 256, 1 << 20));
        if (n.has("logmod_dense")) s.logmod_dense = static_cast<int>(n.integer("logmod_dense", 64, 8192));
        if (n.has("thresholds")) {
            Reader t = n.object("thresholds");
            Calibration& c = s.calibration;
            c.unbounded_slope = t.number("unbounded_slope", c.unbounded_slope);
            c.bounded_slope = t.number("bounded_slope", c.bounded_slope);
            if (!(c.unbounded_slope < c.bounded_slope && c.bounded_slope <= 0.0))
                t.fail("need unbounded_slope < bounded_slope <= 0");
            c.max_residual = t.number("max_residual", c.max_residual);
            if (!(c.max_residual > 0.0)) t.fail("max_residual must be positive", "/max_residual");
            if (t.has("fit_points")) c.fit_points = static_cast<int>(t.integer("fit_points", 2, 50));
            c.vanish_ratio = t.number("vanish_ratio", c.vanish_ratio);
            c.persist_ratio = t.number("persist_ratio", c.persist_ratio);
            if (!(c.vanish_ratio > 0.0 && c.vanish_ratio < c.persist_ratio && c.persist_ratio <= 1.0))
                t.fail("need 0 < vanish_ratio < persist_ratio <= 1");
            c.vanish_slope = t.number("vanish_slope", c.vanish_slope);
            if (!(c.vanish_slope > 0.0)) t.fail("vanish_slope must be positive", "/vanish_slope");
            c.weak_bounded_ratio = t.number("weak_bounded_ratio", c.weak_bounded_ratio);
            if (!(c.weak_bounded_ratio >= 1.0)) t.fail("weak_bounded_ratio must be at least 1", "/weak_bounded_ratio");
            t.finish();
        }
        n.finish();
    }

    if (top.has("seed")) s.seed = static_cast<std::uint64_t>(top.integer("seed", 0, std::numeric_limits<long long>::max()));

    if (top.has("expect")) {
        const std::string e = top.string("expect");
        if (e != "singular" && e != "absolutely-continuous" && e != "mixed")
            top.fail_at("/expect", "expect must be singular, absolutely-continuous or mixed");
        s.expect = e;
    }

    if (top.has("output")) {
        Reader o = top.object("output");
        if (o.has("dir")) s.output_dir = o.string("dir");
        if (o.has("tables")) s.tables = o.boolean("tables");
        o.finish();
    }
    top.finish();
    validate_cross(s, index);
    return s;
}

ojson evidence_json(const Evidence& e) {
    ojson j;
    j["detector"] = e.detector;
    j["vector"] = e.vector_id;
    j["slope"] = e.fit.points > 0 ? ojson(e.fit.slope) : ojson(nullptr);
    j["residual"] = e.fit.points > 0 ? ojson(e.fit.residual) : ojson(nullptr);
    j["fit_points"] = e.fit.points;
    j["call"] = e.call;
    j["ratio"] = e.ratio ? ojson(*e.ratio) : ojson(nullptr);
    j["eps"] = e.eps;
    j["norms"] = e.norms;
    if (!e.values.empty()) {
        ojson re = ojson::array(), im = ojson::array();
        for (cplx z : e.values) {
            re.push_back(z.real());
            im.push_back(z.imag());
        }
        j["values_re"] = re;
        j["values_im"] = im;
    }
    return j;
}

const Evidence* find_evidence(const VectorVerdict& v, const std::string& detector) {
    for (const auto& e : v.evidence)
        if (e.detector == detector) return &e;
    return nullptr;
}

std::string mode_name(AnnihilatorMode m) { return m == AnnihilatorMode::thm2 ? "thm2" : "thm3"; }

}  // namespace

Scenario parse_scenario(const std::string& source) {
    json root;
    try {
        root = json::parse(source);
    } catch (const json::parse_error& e) {
        // byte offset -> line and column
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, source.size());
        const auto line = 1 + std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        const auto nl = source.rfind('\n', upto == 0 ? 0 : upto - 1);
        const std::size_t col = nl == std::string::npos ? upto + 1 : upto - nl;
        throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                          ": " + e.what());
    }
    const LineIndex index(source);
    return parse(root, &index);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_eps_ladder(Scenario& s, const std::vector<double>& ladder) {
    check_ladder(ladder, [](const std::string& w) { throw ConfigError("--eps-ladder: " + w); });
    s.eps_ladder = ladder;
    validate_cross(s, nullptr);
}

void apply_grid(Scenario& s, int grid) {
    if (grid < 256 || grid > (1 << 20)) throw ConfigError("--grid: must lie in [256, 1048576]");
    s.grid = grid;
}

OperatorModel build_model(const Scenario& s) {
    if (s.rank == 1) return OperatorModel(s.measure, s.strengths.at(0));
    return OperatorModel::rank_two(s.measure, s.strengths.at(0), s.strengths.at(1));
}

Scenario with_rank_two(const Scenario& s) {
    Scenario out = s;
    out.rank = 2;
    out.strengths = {1.0, 1.0};
    return out;
}

AnnihilatorBundle build_bundle(const Scenario& s, const OperatorModel& model) {
    if (s.mode == AnnihilatorMode::thm3) return build_beta_thm3(model, s.delta);
    Thm2Options opt;
    opt.dense = s.logmod_dense;
    AnnihilatorBundle b = build_gamma_thm2(model, s.delta0, opt);
    return s.omega.empty() ? b : derealize(b, s.omega);
}

std::vector<RegionSpec> regions(const Scenario& s) {
    if (s.mode == AnnihilatorMode::thm2)
        return {{-std::numeric_limits<double>::infinity(), -s.delta0, "(-inf," + num(-s.delta0) + ")"}};
    std::vector<RegionSpec> out;
    for (const auto& [a, b] : s.delta) out.push_back({a, b, "[" + num(a) + "," + num(b) + "]"});
    return out;
}

ScenarioReport run_scenario(const Scenario& s) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioReport r;
    r.scenario_id = s.id;
    r.mode = s.mode;
    r.calibration = s.calibration;
    r.eps_ladder = s.eps_ladder;
    r.grid = s.grid;
    r.seed = s.seed;
    r.rank = s.rank;
    const OperatorModel model = build_model(s);
    const AnnihilatorBundle bundle = build_bundle(s, model);
    DetectOptions opt;
    opt.grid.base_points = s.grid;
    for (const auto& region : regions(s)) {
        try {
            r.regions.push_back(detect_region(model, bundle, region, s.eps_ladder, s.seed, s.calibration, opt));
        } catch (const NumericError& e) {
            throw NumericError("scenario " + s.id + ", region " + region.label + ": " + e.what());
        }
    }
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::string report_json(const ScenarioReport& r) {
    ojson j;
    j["scenario_id"] = r.scenario_id;
    j["mode"] = mode_name(r.mode);
    ojson verdicts = ojson::array();
    for (const auto& reg : r.regions) {
        ojson v;
        v["region"] = reg.region;
        v["verdict"] = to_string(reg.verdict);
        ojson ev = ojson::array(), vecs = ojson::array();
        for (const auto& vv : reg.vectors) {
            vecs.push_back(ojson{{"vector", vv.vector_id}, {"verdict", to_string(vv.verdict)}});
            for (const auto& e : vv.evidence) ev.push_back(evidence_json(e));
        }
        v["vectors"] = vecs;
        v["evidence"] = ev;
        verdicts.push_back(v);
    }
    j["verdicts"] = verdicts;
    const Calibration& c = r.calibration;
    j["calibration"] = ojson{
        {"unbounded_slope", c.unbounded_slope},
        {"bounded_slope", c.bounded_slope},
        {"max_residual", c.max_residual},
        {"fit_points", c.fit_points},
        {"vanish_ratio", c.vanish_ratio},
        {"vanish_slope", c.vanish_slope},
        {"persist_ratio", c.persist_ratio},
        {"weak_bounded_ratio", c.weak_bounded_ratio},
        {"eps_ladder", r.eps_ladder},
        {"grid", r.grid},
        {"seed", r.seed},
        {"rank", r.rank},
        {"converse_is_heuristic", true},
    };
    j["runtime_ms"] = r.runtime_ms ? ojson(*r.runtime_ms) : ojson(nullptr);
    return j.dump(2) + "\n";
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = std::string(kTraceHeader) + "\n";
    for (const auto& r : rows)
        out += r.detector + "," + r.vector_id + "," + num(r.eps) + "," + num(r.value.real()) + "," + num(r.value.imag()) +
               "," + num(r.norm) + "\n";
    return out;
}

std::vector<TraceRow> trace_rows(const ScenarioReport& r, const std::string& detector, const std::string& vector) {
    std::vector<TraceRow> rows;
    auto want = [&](const std::string& d, const std::string& v) {
        return (detector.empty() || detector == d) && (vector.empty() || vector == v);
    };
    for (const auto& reg : r.regions)
        for (const auto& vv : reg.vectors) {
            const Evidence* strong = find_evidence(vv, "smirnov_strong");
            const Evidence* with = find_evidence(vv, "smirnov_strong_delta");
            if (strong && want("smirnov_strong", vv.vector_id))
                for (std::size_t i = 0; i < strong->eps.size(); ++i)
                    rows.push_back({"smirnov_strong", vv.vector_id, strong->eps[i],
                                    cplx(with ? with->norms[i] : 0.0, 0.0), strong->norms[i]});
            if (strong && want("ac_baseline", vv.vector_id))
                for (std::size_t i = 0; i < strong->eps.size(); ++i)
                    rows.push_back({"ac_baseline", vv.vector_id, strong->eps[i], 0.0, strong->norms[i]});
            for (const auto& e : vv.evidence) {
                if (e.detector == "smirnov_strong" || e.detector == "smirnov_strong_delta") continue;
                if (!want(e.detector, vv.vector_id)) continue;
                for (std::size_t i = 0; i < e.eps.size(); ++i)
                    rows.push_back({e.detector, vv.vector_id, e.eps[i], i < e.values.size() ? e.values[i] : cplx(0.0),
                                    e.norms[i]});
            }
        }
    return rows;
}

const std::vector<std::string>& detector_names() {
    static const std::vector<std::string> names{"smirnov_strong", "smirnov_weak", "ac_baseline", "weak_thm2",
                                                "weak_thm3"};
    return names;
}

std::vector<TraceRow> single_trace(const Scenario& s, const std::string& detector, const std::string& vector) {
    const auto& names = detector_names();
    if (std::find(names.begin(), names.end(), detector) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown detector \"" + detector + "\" (known: " + list + ")");
    }
    if ((detector == "weak_thm2" && s.mode != AnnihilatorMode::thm2) ||
        (detector == "weak_thm3" && s.mode != AnnihilatorMode::thm3))
        throw ConfigError("detector " + detector + " needs a scenario in mode " + detector.substr(5));
    std::optional<DictionaryEntry> entry;
    std::string known;
    for (const auto& reg : regions(s))
        for (auto& d : region_dictionary(s.measure, reg.lo, reg.hi, s.seed)) {
            known += (known.empty() ? "" : ", ") + d.id;
            if (!entry && d.id == vector) entry = std::move(d);
        }
    if (!entry) throw ConfigError("unknown vector \"" + vector + "\" (dictionary: " + known + ")");
    const OperatorModel model = build_model(s);
    DetectOptions opt;
    opt.grid.base_points = s.grid;
    std::vector<TraceRow> rows;
    if (detector == "smirnov_strong" || detector == "ac_baseline") {
        for (const auto& p : smirnov_strong_trace(model, entry->vector, s.eps_ladder, opt))
            rows.push_back({detector, vector, p.eps, detector == "ac_baseline" ? cplx(0.0) : cplx(p.with_delta, 0.0),
                            p.without_delta});
    } else if (detector == "smirnov_weak") {
        for (const auto& p : smirnov_weak_trace(model, entry->vector, entry->vector, s.eps_ladder, opt))
            rows.push_back({detector, vector, p.eps, cplx(p.bare, 0.0), p.weighted});
    } else {
        const AnnihilatorBundle bundle = build_bundle(s, model);
        const auto t = s.mode == AnnihilatorMode::thm2 ? weak_trace_thm2(bundle, entry->vector, entry->vector, s.eps_ladder)
                                                       : weak_trace_thm3(bundle, entry->vector, entry->vector, s.eps_ladder);
        for (std::size_t i = 0; i < t.size(); ++i) rows.push_back({detector, vector, s.eps_ladder[i], t[i], std::abs(t[i])});
    }
    return rows;
}

std::vector<TraceRow> pair_traces(const Scenario& s, const OperatorModel& /*model*/, const AnnihilatorBundle& bundle) {
    std::vector<TraceRow> rows;
    const std::string name = s.mode == AnnihilatorMode::thm2 ? "weak_thm2" : "weak_thm3";
    for (const auto& reg : regions(s)) {
        const auto dict = region_dictionary(s.measure, reg.lo, reg.hi, s.seed);
        for (const auto& u : dict)
            for (const auto& v : dict) {
                const auto t = s.mode == AnnihilatorMode::thm2 ? weak_trace_thm2(bundle, u.vector, v.vector, s.eps_ladder)
                                                               : weak_trace_thm3(bundle, u.vector, v.vector, s.eps_ladder);
                for (std::size_t i = 0; i < t.size(); ++i)
                    rows.push_back({name, u.id + ":" + v.id, s.eps_ladder[i], t[i], std::abs(t[i])});
            }
    }
    return rows;
}

PlotTables plot_tables(const Scenario& s, const OperatorModel& model, const AnnihilatorBundle& bundle) {
    PlotTables out;
    const auto [lo, hi] = s.measure.hull();
    const double a = lo - 1.0, b = hi + 1.0;
    constexpr int n = 2000;
    constexpr double eps = 1e-3;
    std::string g = "t,eps,gamma_re,gamma_im,gamma_abs\n", ga = "k,gamma_a_abs\n";
    for (int i = 0; i <= n; ++i) {
        const double t = a + (b - a) * i / n;
        const cplx z = bundle.gamma(cplx(t, eps));
        g += num(t) + "," + num(eps) + "," + num(z.real()) + "," + num(z.imag()) + "," + num(std::abs(z)) + "\n";
        ga += num(t) + "," + num(std::abs(gamma_A_boundary(model, t))) + "\n";
    }
    out.gamma_line = std::move(g);
    out.gamma_a_boundary = std::move(ga);
    if (const HerglotzBump* beta = bundle.beta()) {
        std::string bb = "k,b\n";
        for (int i = 0; i <= n; ++i) {
            const double t = a + (b - a) * i / n;
            bb += num(t) + "," + num(beta->b(t)) + "\n";
        }
        out.beta_boundary = std::move(bb);
    }
    return out;
}

}  // namespace specann
