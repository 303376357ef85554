#include "vfkit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vfkit {

nlohmann::json to_json(const Complex& z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Complex complex_from_json(const nlohmann::json& j) {
    return Complex(j.at("re").get<double>(), j.at("im").get<double>());
}

nlohmann::json model_to_json(const PoleResidueModel& model) {
    nlohmann::json j;
    j["order"] = model.order();
    j["poles"] = nlohmann::json::array();
    j["residues"] = nlohmann::json::array();
    for (const auto& p : model.poles) j["poles"].push_back(to_json(p));
    for (const auto& r : model.residues) j["residues"].push_back(to_json(r));
    j["real_symmetric"] = model.real_symmetric;
    return j;
}

PoleResidueModel model_from_json(const nlohmann::json& j) {
    PoleResidueModel model;
    for (const auto& p : j.at("poles")) model.poles.push_back(complex_from_json(p));
    for (const auto& r : j.at("residues")) model.residues.push_back(complex_from_json(r));
    model.real_symmetric = j.value("real_symmetric", false);
    if (model.poles.size() != model.residues.size() ||
        (j.contains("order") && j.at("order").get<std::size_t>() != model.poles.size()))
        throw ParseError("model JSON: inconsistent order/poles/residues");
    return model;
}

nlohmann::json ss_to_json(const StateSpaceModel& ss) {
    nlohmann::json j;
    const int n = ss.n();
    j["n"] = n;
    auto& F = j["F"] = nlohmann::json::array();
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) F.push_back(ss.F(i, k));
    auto& B = j["B"] = nlohmann::json::array();
    for (int i = 0; i < n; ++i) B.push_back(ss.B[i]);
    auto& C = j["C"] = nlohmann::json::array();
    for (int i = 0; i < n; ++i) C.push_back(ss.C[i]);
    return j;
}

StateSpaceModel ss_from_json(const nlohmann::json& j) {
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParseError("state-space JSON: n must be >= 1");
    const auto& F = j.at("F");
    const auto& B = j.at("B");
    const auto& C = j.at("C");
    if (static_cast<int>(F.size()) != n * n || static_cast<int>(B.size()) != n ||
        static_cast<int>(C.size()) != n)
        throw ParseError("state-space JSON: dimension mismatch");
    StateSpaceModel ss;
    ss.F.resize(n, n);
    ss.B.resize(n);
    ss.C.resize(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) ss.F(i, k) = F[i * n + k].get<double>();
    for (int i = 0; i < n; ++i) ss.B[i] = B[i].get<double>();
    for (int i = 0; i < n; ++i) ss.C[i] = C[i].get<double>();
    return ss;
}

nlohmann::json grid_to_json(const QuadGrid& grid) {
    return {{"L", grid.L}, {"ell", grid.ell}, {"rho_plus", grid.rho_plus}};
}

QuadGrid grid_from_json(const nlohmann::json& j) {
    return bcc_grid(j.at("ell").get<int>(), j.at("L").get<double>());
}

nlohmann::json samples_to_json(const SampleSet& samples) {
    nlohmann::json j;
    j["samples"] = nlohmann::json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        nlohmann::json e;
        e["s"] = to_json(samples[i].s);
        e["value"] = to_json(samples[i].value);
        if (samples[i].deriv) e["deriv"] = to_json(*samples[i].deriv);
        if (samples[i].sigma) e["sigma"] = *samples[i].sigma;
        j["samples"].push_back(e);
    }
    if (samples.m_plus()) j["m_plus"] = to_json(*samples.m_plus());
    return j;
}

SampleSet samples_from_json(const nlohmann::json& j) {
    std::vector<FrequencySample> list;
    for (const auto& e : j.at("samples")) {
        FrequencySample f;
        f.s = complex_from_json(e.at("s"));
        f.value = complex_from_json(e.at("value"));
        if (e.contains("deriv")) f.deriv = complex_from_json(e.at("deriv"));
        if (e.contains("sigma")) f.sigma = e.at("sigma").get<double>();
        list.push_back(f);
    }
    std::optional<Complex> m_plus;
    if (j.contains("m_plus")) m_plus = complex_from_json(j.at("m_plus"));
    return SampleSet(std::move(list), m_plus);
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != ' ' && c != '\t') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& tok) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw ParseError("CSV: trailing characters in number: " + tok);
        return v;
    } catch (const std::invalid_argument&) {
        throw ParseError("CSV: not a number: " + tok);
    } catch (const std::out_of_range&) {
        throw ParseError("CSV: number out of range: " + tok);
    }
}

}  // namespace

std::string samples_to_csv(const SampleSet& samples) {
    const bool deriv = samples.has_derivatives();
    bool sigma = samples.size() > 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!samples[i].sigma) sigma = false;
    std::ostringstream os;
    os << "s_re,s_im,h_re,h_im";
    if (deriv) os << ",hp_re,hp_im";
    if (sigma) os << ",sigma";
    os << "\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& f = samples[i];
        os << fmt17(f.s.real()) << ',' << fmt17(f.s.imag()) << ',' << fmt17(f.value.real())
           << ',' << fmt17(f.value.imag());
        if (deriv) os << ',' << fmt17(f.deriv->real()) << ',' << fmt17(f.deriv->imag());
        if (sigma) os << ',' << fmt17(*f.sigma);
        os << "\n";
    }
    return os.str();
}

SampleSet samples_from_csv(const std::string& text, std::optional<Complex> m_plus) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("sample CSV: empty input");
    const auto header = split_line(line);
    int c_s_re = -1, c_s_im = -1, c_h_re = -1, c_h_im = -1, c_hp_re = -1, c_hp_im = -1,
        c_sigma = -1;
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
        const std::string& name = header[c];
        if (name == "s_re") c_s_re = c;
        else if (name == "s_im") c_s_im = c;
        else if (name == "h_re") c_h_re = c;
        else if (name == "h_im") c_h_im = c;
        else if (name == "hp_re") c_hp_re = c;
        else if (name == "hp_im") c_hp_im = c;
        else if (name == "sigma") c_sigma = c;
        else throw ParseError("sample CSV: unknown column " + name);
    }
    if (c_s_re < 0 || c_s_im < 0 || c_h_re < 0 || c_h_im < 0)
        throw ParseError("sample CSV: missing required columns");
    if ((c_hp_re < 0) != (c_hp_im < 0))
        throw ParseError("sample CSV: hp_re/hp_im must come together");

    std::vector<FrequencySample> list;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto tok = split_line(line);
        if (tok.size() != header.size()) throw ParseError("sample CSV: ragged row");
        FrequencySample f;
        f.s = Complex(parse_double(tok[c_s_re]), parse_double(tok[c_s_im]));
        f.value = Complex(parse_double(tok[c_h_re]), parse_double(tok[c_h_im]));
        if (c_hp_re >= 0)
            f.deriv = Complex(parse_double(tok[c_hp_re]), parse_double(tok[c_hp_im]));
        if (c_sigma >= 0) f.sigma = parse_double(tok[c_sigma]);
        list.push_back(f);
    }
    return SampleSet(std::move(list), m_plus);
}

std::string grid_to_csv(const QuadGrid& grid) {
    std::ostringstream os;
    os << "s_re,s_im,weight\n";
    for (int j = 0; j < grid.ell; ++j)
        os << fmt17(grid.nodes[j].real()) << ',' << fmt17(grid.nodes[j].imag()) << ','
           << fmt17(grid.weights[j]) << "\n";
    return os.str();
}

QuadGrid grid_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("grid CSV: empty input");
    if (split_line(line) != std::vector<std::string>{"s_re", "s_im", "weight"})
        throw ParseError("grid CSV: expected header s_re,s_im,weight");
    QuadGrid g;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto tok = split_line(line);
        if (tok.size() != 3) throw ParseError("grid CSV: ragged row");
        g.nodes.push_back(Complex(parse_double(tok[0]), parse_double(tok[1])));
        g.weights.push_back(parse_double(tok[2]));
    }
    g.ell = static_cast<int>(g.nodes.size());
    if (g.ell < 1) throw ParseError("grid CSV: no nodes");
    // Recover L from the leading weight w_1 = csc(t_1) sqrt(L pi/(ell+1)).
    const double t1 = M_PI / (g.ell + 1);
    const double w1s = g.weights[0] * std::sin(t1);
    g.L = w1s * w1s * (g.ell + 1) / M_PI;
    if (!(g.L > 0.0)) throw ParseError("grid CSV: invalid leading weight");
    g.rho_plus = std::sqrt(M_PI / (g.L * (g.ell + 1)));
    // Light validation against the rule.
    const QuadGrid ref = bcc_grid(g.ell, g.L);
    for (int j = 0; j < g.ell; ++j) {
        if (std::abs(ref.nodes[j] - g.nodes[j]) > 1e-9 * (1.0 + std::abs(ref.nodes[j])) ||
            std::abs(ref.weights[j] - g.weights[j]) > 1e-9 * (1.0 + ref.weights[j]))
            throw ParseError("grid CSV: nodes/weights do not match a B/CC rule");
    }
    return g;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write file: " + path);
    out << content;
}

}  // namespace vfkit
