#include "posobs/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace posobs {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw InputError(msg); }

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where + ": missing required key '" + key + "'");
    return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (!k.empty() && k.front() == '_') continue;
        if (!allowed.count(k)) fail(where + ": unknown key '" + k + "'");
    }
}

double read_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where + ": expected a number");
    return v.get<double>();
}

std::size_t read_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(where + ": expected a nonnegative integer");
    return v.get<std::size_t>();
}

Vec read_vector(const json& v, std::size_t len, const std::string& where) {
    if (!v.is_array()) fail(where + ": expected an array");
    if (v.size() != len) fail(where + ": expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
    Vec out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(read_number(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

Mat read_matrix(const json& v, std::size_t rows, std::size_t cols, const std::string& where) {
    if (!v.is_array() || v.size() != rows)
        fail(where + ": expected " + std::to_string(rows) + " rows of " + std::to_string(cols) + " entries");
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const Vec row = read_vector(v[r], cols, where + " row " + std::to_string(r + 1));
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

std::vector<Mat> read_family(const json& v, std::size_t count, std::size_t n, const std::string& where) {
    if (!v.is_array() || v.size() != count)
        fail(where + ": expected " + std::to_string(count) + " matrices (N)");
    std::vector<Mat> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(read_matrix(v[i], n, n, where + "[" + std::to_string(i + 1) + "]"));
    return out;
}

json vector_to_json(const Vec& v) { return json(v); }

bool is_flat(const json& v) {
    return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_primitive(); });
}

// Like dump(2), but arrays of scalars stay on one line.
void format(std::ostream& os, const json& v, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    if (v.is_object() && !v.empty()) {
        os << "{\n";
        std::size_t k = 0;
        for (auto it = v.begin(); it != v.end(); ++it, ++k) {
            os << pad << json(it.key()).dump() << ": ";
            format(os, it.value(), depth + 1);
            os << (k + 1 < v.size() ? ",\n" : "\n");
        }
        os << close << '}';
    } else if (v.is_array() && !v.empty() && !is_flat(v)) {
        os << "[\n";
        for (std::size_t k = 0; k < v.size(); ++k) {
            os << pad;
            format(os, v[k], depth + 1);
            os << (k + 1 < v.size() ? ",\n" : "\n");
        }
        os << close << ']';
    } else if (v.is_array()) {
        os << '[';
        for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k].dump();
        os << ']';
    } else {
        os << v.dump();
    }
}

}  // namespace

ProblemFile parse_problem(const json& doc) {
    if (!doc.is_object()) fail("problem file: top level must be an object");
    reject_unknown(doc, {"domain", "n", "p", "N", "A_lower", "A_upper", "x0_lower", "x0_upper", "truth", "observer",
                         "switching", "sim"},
                   "problem file");

    ProblemFile pf;
    const json& dom = require(doc, "domain", "problem file");
    if (dom == "continuous")
        pf.system.domain = Domain::continuous;
    else if (dom == "discrete")
        pf.system.domain = Domain::discrete;
    else
        fail("problem file: 'domain' must be \"continuous\" or \"discrete\"");

    const std::size_t n = read_count(require(doc, "n", "problem file"), "n");
    const std::size_t p = read_count(require(doc, "p", "problem file"), "p");
    const std::size_t count = read_count(require(doc, "N", "problem file"), "N");
    if (n < 2 || p < 1 || p >= n)
        fail("invalid partition: need 1 <= p < n, got p=" + std::to_string(p) + " n=" + std::to_string(n));
    if (count < 1) fail("N: need at least one subsystem");

    pf.system.n = n;
    pf.system.p = p;
    pf.system.a_lower = read_family(require(doc, "A_lower", "problem file"), count, n, "A_lower");
    pf.system.a_upper = read_family(require(doc, "A_upper", "problem file"), count, n, "A_upper");
    pf.system.x0_lower = read_vector(require(doc, "x0_lower", "problem file"), n, "x0_lower");
    pf.system.x0_upper = read_vector(require(doc, "x0_upper", "problem file"), n, "x0_upper");
    pf.system.validate();

    if (auto it = doc.find("_comment"); it != doc.end() && it->is_string()) pf.comment = it->get<std::string>();

    if (auto it = doc.find("truth"); it != doc.end()) {
        reject_unknown(*it, {"A", "x0"}, "truth");
        TrueSystem t;
        t.a = read_family(require(*it, "A", "truth"), count, n, "truth.A");
        t.x0 = read_vector(require(*it, "x0", "truth"), n, "truth.x0");
        pf.truth = std::move(t);
    }
    if (auto it = doc.find("observer"); it != doc.end()) {
        // Derived matrices written by `synthesize` are accepted and recomputed.
        reject_unknown(*it, {"L", "omega0_lower", "omega0_upper", "F", "Chat", "Dhat", "subsystems"}, "observer");
        ObserverSpec o;
        o.gain = read_matrix(require(*it, "L", "observer"), n - p, p, "observer.L");
        o.omega0_lower = read_vector(require(*it, "omega0_lower", "observer"), n - p, "observer.omega0_lower");
        o.omega0_upper = read_vector(require(*it, "omega0_upper", "observer"), n - p, "observer.omega0_upper");
        pf.observer = std::move(o);
    }
    if (auto it = doc.find("switching"); it != doc.end()) {
        reject_unknown(*it, {"seed", "min_dwell", "horizon", "steps"}, "switching");
        SwitchingSpec s;
        if (auto f = it->find("seed"); f != it->end()) {
            if (!f->is_number_unsigned()) fail("switching.seed: expected a nonnegative integer");
            s.seed = f->get<std::uint64_t>();
        }
        if (auto f = it->find("min_dwell"); f != it->end()) {
            s.min_dwell = read_number(*f, "switching.min_dwell");
            if (!(*s.min_dwell >= 0.0)) fail("switching.min_dwell: must be >= 0");
        }
        if (auto f = it->find("horizon"); f != it->end()) {
            s.horizon = read_number(*f, "switching.horizon");
            if (!(*s.horizon > 0.0)) fail("switching.horizon: must be > 0");
        }
        if (auto f = it->find("steps"); f != it->end()) s.steps = read_count(*f, "switching.steps");
        pf.switching = s;
    }
    if (auto it = doc.find("sim"); it != doc.end()) {
        reject_unknown(*it, {"step"}, "sim");
        if (auto f = it->find("step"); f != it->end()) {
            pf.step = read_number(*f, "sim.step");
            if (!(*pf.step > 0.0)) fail("sim.step: must be > 0");
        }
    }
    return pf;
}

ProblemFile parse_problem_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
    }
    return parse_problem(doc);
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem_text(buf.str());
}

json matrix_to_json(const Mat& m) { return json(m.to_rows()); }

json to_json(const ProblemFile& pf) {
    const IntervalSystem& s = pf.system;
    json doc = json::object();
    if (!pf.comment.empty()) doc["_comment"] = pf.comment;
    doc["domain"] = to_string(s.domain);
    doc["n"] = s.n;
    doc["p"] = s.p;
    doc["N"] = s.subsystems();
    json lo = json::array();
    json up = json::array();
    for (std::size_t i = 0; i < s.subsystems(); ++i) {
        lo.push_back(matrix_to_json(s.a_lower[i]));
        up.push_back(matrix_to_json(s.a_upper[i]));
    }
    doc["A_lower"] = std::move(lo);
    doc["A_upper"] = std::move(up);
    doc["x0_lower"] = vector_to_json(s.x0_lower);
    doc["x0_upper"] = vector_to_json(s.x0_upper);
    if (pf.truth) {
        json a = json::array();
        for (const Mat& m : pf.truth->a) a.push_back(matrix_to_json(m));
        doc["truth"] = {{"A", std::move(a)}, {"x0", vector_to_json(pf.truth->x0)}};
    }
    if (pf.observer)
        doc["observer"] = {{"L", matrix_to_json(pf.observer->gain)},
                           {"omega0_lower", vector_to_json(pf.observer->omega0_lower)},
                           {"omega0_upper", vector_to_json(pf.observer->omega0_upper)}};
    if (pf.switching) {
        json sw = json::object();
        if (pf.switching->seed) sw["seed"] = *pf.switching->seed;
        if (pf.switching->min_dwell) sw["min_dwell"] = *pf.switching->min_dwell;
        if (pf.switching->horizon) sw["horizon"] = *pf.switching->horizon;
        if (pf.switching->steps) sw["steps"] = *pf.switching->steps;
        doc["switching"] = std::move(sw);
    }
    if (pf.step) doc["sim"] = {{"step", *pf.step}};
    return doc;
}

json observer_to_json(const ObserverRealization& obs) {
    json subs = json::array();
    for (const SubsystemObserver& s : obs.subsystems)
        subs.push_back({{"Ahat_lower", matrix_to_json(s.ahat_lower)},
                        {"Ahat_upper", matrix_to_json(s.ahat_upper)},
                        {"G_lower", matrix_to_json(s.g_lower)},
                        {"G_upper", matrix_to_json(s.g_upper)}});
    return {{"L", matrix_to_json(obs.gain)},
            {"omega0_lower", vector_to_json(obs.omega0_lower)},
            {"omega0_upper", vector_to_json(obs.omega0_upper)},
            {"F", matrix_to_json(obs.f)},
            {"Chat", matrix_to_json(obs.chat)},
            {"Dhat", matrix_to_json(obs.dhat)},
            {"subsystems", std::move(subs)}};
}

std::string format_json(const json& doc) {
    std::ostringstream os;
    format(os, doc, 0);
    os << '\n';
    return os.str();
}

std::string serialize_problem(const ProblemFile& pf) { return format_json(to_json(pf)); }

}  // namespace posobs
