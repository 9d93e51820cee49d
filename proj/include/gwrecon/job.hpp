#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "gwrecon/birkhoff.hpp"
#include "gwrecon/cone_k.hpp"

namespace gwr::job
{

inline constexpr const char *job_schema = "gwrecon.job/1";
inline constexpr const char *output_schema = "gwrecon.output/1";

struct target_spec {
    std::string type; // projective | projective-K | equivariant | local
    int n = 0;
    int lambda_order = 0; // equivariant, local
    int l = 0;            // local
    bool operator==(const target_spec &) const = default;
};

struct caps_spec {
    int q_degree = 3;
    int deformation_degree = 2;
    int z_neg = 60;
    int z_pos = 60;
    bool operator==(const caps_spec &) const = default;
};

// coefficient * loop^loop_power * prod monomial, placed on basis vector `basis`.
struct input_term {
    std::size_t basis = 0;
    int loop_power = 0;
    rational coefficient;
    std::map<std::string, int> monomial;
    bool operator==(const input_term &) const = default;
};

struct job_spec {
    target_spec target;
    std::string pipeline;
    caps_spec caps;
    int dmax = 0;
    std::vector<std::string> variables;
    std::vector<input_term> input;
    std::vector<std::vector<rational>> basis; // optional Phi/Psi coefficient rows
    std::string output_path;
    std::string format = "json";
    bool operator==(const job_spec &) const = default;
};

inline const std::vector<std::string> &pipelines()
{
    static const std::vector<std::string> p{"seed", "j-function", "s-matrix", "nd-invariants", "k-j-function",
                                            "k-birkhoff"};
    return p;
}

namespace detail
{

inline rational rational_field(const nlohmann::json &j, const std::string &what)
{
    if (!j.is_string())
        throw validation_error(what + " must be a rational string \"a/b\"");
    return parse_rational(j.get<std::string>());
}

inline int int_field(const nlohmann::json &j, const std::string &what)
{
    if (!j.is_number_integer())
        throw validation_error(what + " must be an integer");
    return j.get<int>();
}

inline void only_keys(const nlohmann::json &j, std::initializer_list<const char *> keys, const std::string &where)
{
    if (!j.is_object())
        throw validation_error(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(keys.begin(), keys.end(), [&](const char *k) { return it.key() == k; }))
            throw validation_error(where + ": unknown field '" + it.key() + "'");
}

inline std::string monomial_text(const std::map<std::string, int> &m)
{
    if (m.empty())
        return "1";
    std::string s;
    for (const auto &[v, e] : m) {
        if (!s.empty())
            s += "*";
        s += v;
        if (e != 1)
            s += "^" + std::to_string(e);
    }
    return s;
}

} // namespace detail

// ---- job files ----

inline job_spec parse_job(const nlohmann::json &j)
{
    using namespace detail;
    only_keys(j, {"schema", "target", "pipeline", "caps", "dmax", "variables", "input", "basis", "output"}, "job");
    if (!j.contains("schema") || j["schema"] != job_schema)
        throw validation_error(std::string("job: schema must be \"") + job_schema + "\"");
    job_spec s;
    if (!j.contains("target"))
        throw validation_error("job: missing target");
    const auto &t = j["target"];
    only_keys(t, {"type", "n", "lambda_order", "l"}, "target");
    if (!t.contains("type") || !t["type"].is_string())
        throw validation_error("target: missing type");
    s.target.type = t["type"].get<std::string>();
    if (!t.contains("n"))
        throw validation_error("target: missing n");
    s.target.n = int_field(t["n"], "target.n");
    if (t.contains("lambda_order"))
        s.target.lambda_order = int_field(t["lambda_order"], "target.lambda_order");
    else if (s.target.type == "local")
        s.target.lambda_order = 16;
    if (t.contains("l"))
        s.target.l = int_field(t["l"], "target.l");

    if (!j.contains("pipeline") || !j["pipeline"].is_string())
        throw validation_error("job: missing pipeline");
    s.pipeline = j["pipeline"].get<std::string>();
    if (j.contains("dmax"))
        s.dmax = int_field(j["dmax"], "dmax");

    if (s.pipeline == "nd-invariants") {
        s.caps.q_degree = s.dmax;
        s.caps.deformation_degree = std::max(1, 3 * s.dmax - 4);
    }
    if (s.target.type == "projective-K")
        s.caps.z_neg = s.caps.z_pos = 120;
    if (j.contains("caps")) {
        const auto &c = j["caps"];
        only_keys(c, {"q_degree", "deformation_degree", "z_window"}, "caps");
        if (c.contains("q_degree"))
            s.caps.q_degree = int_field(c["q_degree"], "caps.q_degree");
        if (c.contains("deformation_degree"))
            s.caps.deformation_degree = int_field(c["deformation_degree"], "caps.deformation_degree");
        if (c.contains("z_window")) {
            const auto &w = c["z_window"];
            if (!w.is_array() || w.size() != 2)
                throw validation_error("caps.z_window must be [negative, positive]");
            s.caps.z_neg = int_field(w[0], "caps.z_window[0]");
            s.caps.z_pos = int_field(w[1], "caps.z_window[1]");
        }
    }

    if (j.contains("variables")) {
        if (!j["variables"].is_array())
            throw validation_error("variables must be an array of names");
        for (const auto &v : j["variables"]) {
            if (!v.is_string())
                throw validation_error("variables must be an array of names");
            s.variables.push_back(v.get<std::string>());
        }
    }
    if (j.contains("input")) {
        if (!j["input"].is_array())
            throw validation_error("input must be an array of terms");
        for (const auto &e : j["input"]) {
            only_keys(e, {"basis", "loop_power", "coefficient", "monomial"}, "input term");
            input_term it;
            if (!e.contains("basis") || !e.contains("coefficient"))
                throw validation_error("input term needs basis and coefficient");
            int b = int_field(e["basis"], "input.basis");
            if (b < 0)
                throw validation_error("input.basis must be ≥ 0");
            it.basis = static_cast<std::size_t>(b);
            if (e.contains("loop_power"))
                it.loop_power = int_field(e["loop_power"], "input.loop_power");
            it.coefficient = rational_field(e["coefficient"], "input.coefficient");
            if (e.contains("monomial")) {
                if (!e["monomial"].is_object())
                    throw validation_error("input.monomial must map variable names to exponents");
                for (auto m = e["monomial"].begin(); m != e["monomial"].end(); ++m)
                    it.monomial[m.key()] = int_field(m.value(), "input.monomial exponent");
            }
            s.input.push_back(std::move(it));
        }
    }
    if (j.contains("basis")) {
        if (!j["basis"].is_array())
            throw validation_error("basis must be a matrix of rational strings");
        for (const auto &row : j["basis"]) {
            if (!row.is_array())
                throw validation_error("basis must be a matrix of rational strings");
            std::vector<rational> r;
            for (const auto &x : row)
                r.push_back(rational_field(x, "basis entry"));
            s.basis.push_back(std::move(r));
        }
    }
    if (j.contains("output")) {
        const auto &o = j["output"];
        only_keys(o, {"path", "format"}, "output");
        if (o.contains("path")) {
            if (!o["path"].is_string())
                throw validation_error("output.path must be a string");
            s.output_path = o["path"].get<std::string>();
        }
        if (o.contains("format")) {
            if (!o["format"].is_string())
                throw validation_error("output.format must be a string");
            s.format = o["format"].get<std::string>();
        }
    }
    return s;
}

inline job_spec parse_job(const std::string &text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw validation_error(std::string("job file is not valid JSON: ") + e.what());
    }
    return parse_job(j);
}

inline nlohmann::json to_json(const job_spec &s, bool with_output = true)
{
    nlohmann::json j;
    j["schema"] = job_schema;
    nlohmann::json t;
    t["type"] = s.target.type;
    t["n"] = s.target.n;
    if (s.target.type == "equivariant" || s.target.type == "local")
        t["lambda_order"] = s.target.lambda_order;
    if (s.target.type == "local")
        t["l"] = s.target.l;
    j["target"] = t;
    j["pipeline"] = s.pipeline;
    j["caps"] = {{"q_degree", s.caps.q_degree},
                 {"deformation_degree", s.caps.deformation_degree},
                 {"z_window", {s.caps.z_neg, s.caps.z_pos}}};
    if (s.pipeline == "nd-invariants")
        j["dmax"] = s.dmax;
    j["variables"] = s.variables;
    auto in = nlohmann::json::array();
    for (const auto &it : s.input) {
        nlohmann::json e;
        e["basis"] = it.basis;
        e["loop_power"] = it.loop_power;
        e["coefficient"] = to_string(it.coefficient);
        e["monomial"] = nlohmann::json::object();
        for (const auto &[v, x] : it.monomial)
            e["monomial"][v] = x;
        in.push_back(e);
    }
    j["input"] = in;
    if (!s.basis.empty()) {
        auto b = nlohmann::json::array();
        for (const auto &row : s.basis) {
            auto r = nlohmann::json::array();
            for (const auto &x : row)
                r.push_back(to_string(x));
            b.push_back(r);
        }
        j["basis"] = b;
    }
    if (with_output) {
        nlohmann::json o;
        o["format"] = s.format;
        if (!s.output_path.empty())
            o["path"] = s.output_path;
        j["output"] = o;
    }
    return j;
}

inline bool is_h_target(const std::string &type) { return type == "projective" || type == "equivariant" || type == "local"; }

inline void validate(const job_spec &s)
{
    const auto &t = s.target;
    if (t.type != "projective" && t.type != "projective-K" && t.type != "equivariant" && t.type != "local")
        throw validation_error("target.type must be projective, projective-K, equivariant or local");
    if (t.n < 1)
        throw validation_error("n must be ≥ 1");
    if (t.type == "equivariant" && t.lambda_order < 1)
        throw validation_error("lambda_order must be ≥ 1");
    if (t.type == "local") {
        if (t.l < 1)
            throw validation_error("l must be ≥ 1");
        if (t.lambda_order < 1)
            throw validation_error("lambda_order must be ≥ 1");
    }
    if (std::find(pipelines().begin(), pipelines().end(), s.pipeline) == pipelines().end())
        throw validation_error("unknown pipeline '" + s.pipeline + "'");
    if (s.caps.q_degree < 1 || s.caps.deformation_degree < 1 || s.caps.z_neg < 1 || s.caps.z_pos < 1)
        throw validation_error("caps must be positive");
    if (s.caps.z_neg > 120 || s.caps.z_pos > 120)
        throw validation_error("caps.z_window entries must be ≤ 120");
    if (s.format != "json" && s.format != "csv")
        throw validation_error("output.format must be json or csv");

    const bool k = t.type == "projective-K";
    if (s.pipeline == "nd-invariants") {
        if (t.type != "projective" || t.n != 3)
            throw validation_error("nd-invariants requires target projective with n = 3");
        if (s.dmax < 1)
            throw validation_error("dmax must be ≥ 1");
    } else if (s.pipeline == "k-j-function" || s.pipeline == "k-birkhoff") {
        if (!k)
            throw validation_error(s.pipeline + " requires target projective-K");
    } else if (s.pipeline == "j-function" || s.pipeline == "s-matrix") {
        if (k)
            throw validation_error(s.pipeline + " requires a cohomological target (use the k- pipelines for projective-K)");
    }
    if (s.format == "csv" && s.pipeline != "nd-invariants" && !(is_h_target(t.type) && (s.pipeline == "seed" || s.pipeline == "j-function")))
        throw validation_error("csv output is available for nd-invariants and for cohomological seed/j-function tables");

    const bool takes_input = s.pipeline == "j-function" || s.pipeline == "k-j-function";
    if (!takes_input && (!s.input.empty() || !s.variables.empty()))
        throw validation_error("pipeline " + s.pipeline + " takes no input or variables");
    const std::size_t rank = static_cast<std::size_t>(t.n);
    for (const auto &v : s.variables) {
        if (v.empty() || v == "z" || v == "q" || v == "Q" || v.rfind("lambda", 0) == 0)
            throw validation_error("variable name '" + v + "' is reserved or empty");
        if (std::count(s.variables.begin(), s.variables.end(), v) > 1)
            throw validation_error("duplicate variable '" + v + "'");
    }
    if (s.variables.size() + 6 + (t.type == "equivariant" ? rank : 0) > max_vars)
        throw validation_error("too many variables");
    for (const auto &it : s.input) {
        if (it.basis >= rank)
            throw validation_error("input.basis out of range for rank " + std::to_string(rank));
        bool small = false;
        for (const auto &[v, e] : it.monomial) {
            if (std::find(s.variables.begin(), s.variables.end(), v) == s.variables.end())
                throw validation_error("input monomial uses undeclared variable '" + v + "'");
            if (e < 0)
                throw validation_error("input monomial exponents must be ≥ 0");
            small = small || e > 0;
        }
        if (!small)
            throw validation_error("input terms must carry a positive power of a declared variable");
    }
    if (!s.basis.empty()) {
        if (s.pipeline == "nd-invariants")
            throw validation_error("nd-invariants uses its own basis");
        if (s.basis.size() != rank)
            throw validation_error("basis must have one row per basis element");
        for (const auto &row : s.basis)
            if (row.size() > rank)
                throw validation_error("basis rows have at most rank entries");
    }
}

// ---- output tables ----

struct h_entry {
    std::vector<std::size_t> index;
    int q_degree = 0;
    int z_power = 0;
    std::map<std::string, int> monomial;
    rational value;
    bool operator==(const h_entry &) const = default;
};

struct k_entry {
    std::vector<std::size_t> index;
    int q_degree = 0;
    std::map<std::string, int> monomial;
    std::vector<std::pair<int, rational>> numerator; // (q power, coefficient)
    std::vector<rational> denominator;               // coefficients of q^0, q^1, ...
    bool operator==(const k_entry &) const = default;
};

inline std::map<std::string, int> monomial_of(const layout &lay, const key &k)
{
    std::map<std::string, int> m;
    for (std::size_t i = 1; i < lay.size(); ++i)
        if (lay.var(i).kind != var_kind::novikov && k[i] != 0)
            m[lay.var(i).name] = k[i];
    return m;
}

inline void append_h(std::vector<h_entry> &out, std::vector<std::size_t> index, const series &s)
{
    const auto &lay = *s.lay();
    for (const auto &t : s.terms())
        out.push_back({index, lay.q_degree(t.k), t.k[0], monomial_of(lay, t.k), s.coeff_of(t)});
}

inline void append_k(std::vector<k_entry> &out, std::vector<std::size_t> index, const qrational &x)
{
    const auto &lay = *x.num().lay();
    for (const auto &[rest, g] : qrational::group_by_rest(x.num())) {
        k_entry e;
        e.index = index;
        e.q_degree = lay.q_degree(rest);
        e.monomial = monomial_of(lay, rest);
        const auto &c = g.second.coeffs();
        for (std::size_t i = 0; i < c.size(); ++i)
            if (sgn(c[i]) != 0)
                e.numerator.push_back({g.first + static_cast<int>(i), c[i]});
        e.denominator = x.den().coeffs();
        out.push_back(std::move(e));
    }
}

template <class E> void sort_entries(std::vector<E> &v)
{
    std::sort(v.begin(), v.end(), [](const E &a, const E &b) {
        if constexpr (std::is_same_v<E, h_entry>)
            return std::tie(a.q_degree, a.z_power, a.index, a.monomial) < std::tie(b.q_degree, b.z_power, b.index, b.monomial);
        else
            return std::tie(a.q_degree, a.index, a.monomial) < std::tie(b.q_degree, b.index, b.monomial);
    });
}

inline std::vector<h_entry> h_table(const std::vector<series> &v)
{
    std::vector<h_entry> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        append_h(out, {i}, v[i]);
    sort_entries(out);
    return out;
}

inline std::vector<h_entry> h_table(const matrix<series> &m)
{
    std::vector<h_entry> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            append_h(out, {i, j}, m(i, j));
    sort_entries(out);
    return out;
}

inline std::vector<k_entry> k_table(const std::vector<qrational> &v)
{
    std::vector<k_entry> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        append_k(out, {i}, v[i]);
    sort_entries(out);
    return out;
}

inline std::vector<k_entry> k_table(const matrix<qrational> &m)
{
    std::vector<k_entry> out;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            append_k(out, {i, j}, m(i, j));
    sort_entries(out);
    return out;
}

inline nlohmann::json to_json(const std::vector<h_entry> &t)
{
    auto a = nlohmann::json::array();
    for (const auto &e : t)
        a.push_back({{"index", e.index},
                     {"q_degree", e.q_degree},
                     {"z_power", e.z_power},
                     {"monomial", e.monomial.empty() ? nlohmann::json::object() : nlohmann::json(e.monomial)},
                     {"value", to_string(e.value)}});
    return a;
}

inline nlohmann::json to_json(const std::vector<k_entry> &t)
{
    auto a = nlohmann::json::array();
    for (const auto &e : t) {
        auto num = nlohmann::json::array();
        for (const auto &[p, c] : e.numerator)
            num.push_back({{"q_power", p}, {"value", to_string(c)}});
        auto den = nlohmann::json::array();
        for (const auto &c : e.denominator)
            den.push_back(to_string(c));
        a.push_back({{"index", e.index},
                     {"q_degree", e.q_degree},
                     {"monomial", e.monomial.empty() ? nlohmann::json::object() : nlohmann::json(e.monomial)},
                     {"numerator", num},
                     {"denominator", den}});
    }
    return a;
}

namespace detail
{
inline std::vector<std::size_t> index_field(const nlohmann::json &e)
{
    if (!e.contains("index") || !e["index"].is_array())
        throw validation_error("table entry needs an index array");
    std::vector<std::size_t> out;
    for (const auto &x : e["index"]) {
        if (!x.is_number_unsigned() && !(x.is_number_integer() && x.get<long>() >= 0))
            throw validation_error("table index entries must be non-negative integers");
        out.push_back(x.get<std::size_t>());
    }
    return out;
}

inline std::map<std::string, int> monomial_field(const nlohmann::json &e)
{
    std::map<std::string, int> m;
    if (!e.contains("monomial") || !e["monomial"].is_object())
        throw validation_error("table entry needs a monomial object");
    for (auto it = e["monomial"].begin(); it != e["monomial"].end(); ++it)
        m[it.key()] = int_field(it.value(), "monomial exponent");
    return m;
}
} // namespace detail

inline std::vector<h_entry> parse_h_table(const nlohmann::json &a)
{
    using namespace detail;
    if (!a.is_array())
        throw validation_error("coefficient table must be an array");
    std::vector<h_entry> out;
    for (const auto &e : a) {
        only_keys(e, {"index", "q_degree", "z_power", "monomial", "value"}, "table entry");
        if (!e.contains("q_degree") || !e.contains("z_power") || !e.contains("value"))
            throw validation_error("table entry is incomplete");
        out.push_back({index_field(e), int_field(e["q_degree"], "q_degree"), int_field(e["z_power"], "z_power"),
                       monomial_field(e), rational_field(e["value"], "value")});
    }
    return out;
}

inline std::vector<k_entry> parse_k_table(const nlohmann::json &a)
{
    using namespace detail;
    if (!a.is_array())
        throw validation_error("coefficient table must be an array");
    std::vector<k_entry> out;
    for (const auto &e : a) {
        only_keys(e, {"index", "q_degree", "monomial", "numerator", "denominator"}, "table entry");
        if (!e.contains("q_degree") || !e.contains("numerator") || !e.contains("denominator"))
            throw validation_error("table entry is incomplete");
        k_entry k;
        k.index = index_field(e);
        k.q_degree = int_field(e["q_degree"], "q_degree");
        k.monomial = monomial_field(e);
        for (const auto &n : e["numerator"]) {
            only_keys(n, {"q_power", "value"}, "numerator term");
            k.numerator.push_back({int_field(n.at("q_power"), "q_power"), rational_field(n.at("value"), "value")});
        }
        for (const auto &d : e["denominator"])
            k.denominator.push_back(rational_field(d, "denominator"));
        out.push_back(std::move(k));
    }
    return out;
}

// ---- running ----

struct run_output {
    nlohmann::json document;
    std::string csv; // filled when the job asks for csv
};

namespace detail
{

struct h_setup {
    ring_presentation ring;
    layout_ptr lay;
    algebra_ptr<series> alg;
    seed_spec seed;
};

inline h_setup make_h(const job_spec &s, const std::vector<std::string> &defs)
{
    const auto &t = s.target;
    h_setup h;
    layout_builder b("z");
    b.novikov("Q");
    if (t.type == "projective") {
        h.ring = projective_ring(t.n);
        h.seed = projective_seed(t.n);
    } else if (t.type == "equivariant") {
        h.ring = equivariant_projective_ring(t.n, t.lambda_order);
        h.seed = equivariant_seed(t.n);
        for (const auto &nm : h.ring.lambda_names)
            b.lambda(nm);
        b.lambda_order(t.lambda_order);
    } else {
        h.ring = local_projective_ring(t.n, t.l);
        h.seed = local_seed(t.n, t.l);
        b.lambda("lambda").laurent_lambda().lambda_order(t.lambda_order);
    }
    for (const auto &d : defs)
        b.deformation(d);
    h.lay = b.caps(s.caps.q_degree, s.caps.deformation_degree).z_window(s.caps.z_neg, s.caps.z_pos).build();
    h.alg = make_algebra<series>(h.ring, h.lay);
    return h;
}

template <class C> std::vector<basis_poly<C>> job_basis(const job_spec &s, const algebra_ptr<C> &alg)
{
    if (s.basis.empty())
        return monomial_basis(alg);
    return basis_from_matrix(alg, s.basis);
}

template <class C> C input_monomial(const layout_ptr &lay, const input_term &it)
{
    series m = series::loop(lay, it.loop_power, it.coefficient);
    for (const auto &[v, e] : it.monomial)
        m = m * series::var(lay, v, e);
    return C(m);
}

inline std::vector<std::string> tau_t_names(std::size_t rank)
{
    std::vector<std::string> out;
    for (std::size_t a = 0; a < rank; ++a)
        out.push_back("tau" + std::to_string(a));
    for (std::size_t a = 0; a < rank; ++a)
        out.push_back("t" + std::to_string(a));
    return out;
}

inline std::string csv_h(const std::vector<h_entry> &t)
{
    std::ostringstream os;
    os << "index,q_degree,z_power,monomial,value\n";
    for (const auto &e : t) {
        for (std::size_t i = 0; i < e.index.size(); ++i)
            os << (i ? ":" : "") << e.index[i];
        os << ',' << e.q_degree << ',' << e.z_power << ',' << monomial_text(e.monomial) << ',' << to_string(e.value)
           << '\n';
    }
    return os.str();
}

} // namespace detail

inline run_output run(const job_spec &s)
{
    using namespace detail;
    validate(s);
    run_output out;
    nlohmann::json &doc = out.document;
    doc["schema"] = output_schema;
    doc["job"] = to_json(s, false);
    nlohmann::json result;
    const std::size_t rank = static_cast<std::size_t>(s.target.n);

    if (s.pipeline == "nd-invariants") {
        auto r = nd_invariants(s.dmax, s.caps.q_degree, s.caps.deformation_degree);
        doc["ring"] = to_json(projective_ring(3));
        auto table = nlohmann::json::array();
        std::ostringstream csv;
        csv << "d,N_d,oracle\n";
        for (std::size_t i = 0; i < r.computed.size(); ++i) {
            table.push_back({{"d", i + 1},
                             {"N_d", to_string(rational(r.computed[i]))},
                             {"oracle", to_string(rational(r.oracle[i]))}});
            csv << i + 1 << ',' << r.computed[i].get_str() << ',' << r.oracle[i].get_str() << '\n';
        }
        result["table"] = table;
        result["agree"] = r.agree;
        out.csv = csv.str();
        doc["result"] = result;
        if (!r.agree)
            throw computation_error("nd-invariants: computed numbers disagree with the recursion oracle");
        return out;
    }

    if (s.target.type == "projective-K") {
        layout_builder b("q");
        b.novikov("Q");
        std::vector<std::string> defs = s.variables;
        if (s.pipeline == "k-birkhoff")
            for (std::size_t a = 0; a < rank; ++a)
                defs.push_back("tau" + std::to_string(a));
        for (const auto &d : defs)
            b.deformation(d);
        auto lay = b.caps(s.caps.q_degree, s.caps.deformation_degree).z_window(s.caps.z_neg, s.caps.z_pos).exact_loop().build();
        auto ring = ktheory_projective_ring(s.target.n);
        auto alg = make_algebra<qrational>(ring, lay);
        doc["ring"] = to_json(ring);
        auto fam = seed_family_k(s.target.n, alg, job_basis(s, alg));
        if (s.pipeline == "seed") {
            std::vector<qrational> coords(rank, qrational(lay));
            for (std::size_t d = 0; d < fam.terms.size(); ++d)
                for (std::size_t i = 0; i < rank; ++i)
                    coords[i] += fam.terms[d][i] * qrational(series::var(lay, fam.novikov, static_cast<int>(d)));
            result["seed"] = to_json(k_table(coords));
        } else if (s.pipeline == "k-j-function") {
            element<qrational> t(alg);
            for (const auto &it : s.input)
                t[it.basis] += input_monomial<qrational>(lay, it);
            auto m = match_input_k(fam, t);
            result["point"] = to_json(k_table(m.point.coords()));
            result["tau"] = to_json(k_table(m.tau));
            result["c"] = to_json(k_table(m.c));
            result["iterations"] = m.iterations;
        } else {
            std::vector<qrational> tau;
            for (std::size_t a = 0; a < rank; ++a)
                tau.push_back(qrational(series::var(lay, "tau" + std::to_string(a))));
            auto U = assemble_U_k(fam, tau);
            auto f = birkhoff_factorize_k(U);
            if (!(f.V * f.W == U))
                throw computation_error("k-birkhoff: re-multiplication V*W != U");
            result["U"] = to_json(k_table(U));
            result["V"] = to_json(k_table(f.V));
            result["W"] = to_json(k_table(f.W));
            result["iterations"] = f.iterations;
        }
        doc["result"] = result;
        return out;
    }

    const bool smat = s.pipeline == "s-matrix";
    auto h = make_h(s, smat ? tau_t_names(rank) : s.variables);
    doc["ring"] = to_json(h.ring);
    auto fam = seed_family(h.seed, h.alg, job_basis(s, h.alg));
    if (s.pipeline == "seed") {
        std::vector<series> coords(rank, series(h.lay));
        for (std::size_t d = 0; d < fam.terms.size(); ++d)
            for (std::size_t i = 0; i < rank; ++i)
                coords[i] += fam.terms[d][i] * series::var(h.lay, fam.novikov, static_cast<int>(d));
        auto t = h_table(coords);
        result["seed"] = to_json(t);
        if (s.format == "csv")
            out.csv = csv_h(t);
    } else if (s.pipeline == "j-function") {
        element<series> t(h.alg);
        for (const auto &it : s.input)
            t[it.basis] += input_monomial<series>(h.lay, it);
        auto m = match_input(fam, t);
        auto pt = h_table(m.point.coords());
        result["point"] = to_json(pt);
        result["tau"] = to_json(h_table(m.tau));
        result["c"] = to_json(h_table(m.c));
        result["iterations"] = m.iterations;
        if (s.format == "csv")
            out.csv = csv_h(pt);
    } else {
        auto r = smatrix_pipeline(fam);
        auto checks = structural_checks(r.S, h.alg, r.t_idx);
        auto qp = quantum_product_of(r.S, r.t_idx);
        result["S"] = to_json(h_table(r.S));
        result["mirror_map"] = to_json(h_table(r.mirror));
        result["tau_of_t"] = to_json(h_table(r.tau_of_t));
        auto qj = nlohmann::json::array();
        for (std::size_t b = 0; b < qp.C.size(); ++b)
            qj.push_back({{"direction", b}, {"matrix", to_json(h_table(qp.C[b]))}});
        result["quantum_product"] = qj;
        result["quantum_product_valid_deformation_degree"] = qp.valid_def_degree;
        auto cj = nlohmann::json::array();
        for (const auto &c : checks)
            cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        result["checks"] = cj;
        doc["result"] = result;
        for (const auto &c : checks)
            if (!c.pass)
                throw computation_error("s-matrix: " + c.name + " check failed, " + c.detail);
        return out;
    }
    doc["result"] = result;
    return out;
}

inline std::string render(const run_output &r, const std::string &format)
{
    if (format == "csv")
        return r.csv;
    return r.document.dump(2) + "\n";
}

// Human-readable one-paragraph summary for stderr.
inline std::string summary(const job_spec &s, const run_output &r)
{
    std::ostringstream os;
    os << s.pipeline << " on " << s.target.type << " n=" << s.target.n << ": ";
    const auto &res = r.document.contains("result") ? r.document["result"] : nlohmann::json::object();
    if (res.contains("table")) {
        for (const auto &row : res["table"])
            os << "N_" << row["d"].get<int>() << "=" << row["N_d"].get<std::string>() << " ";
        os << (res["agree"].get<bool>() ? "(matches oracle)" : "(ORACLE MISMATCH)");
    } else {
        std::size_t n = 0;
        for (auto it = res.begin(); it != res.end(); ++it)
            if (it.value().is_array())
                n += it.value().size();
        os << n << " table entries";
        if (res.contains("iterations"))
            os << ", " << res["iterations"].get<int>() << " iterations";
    }
    return os.str();
}

} // namespace gwr::job
