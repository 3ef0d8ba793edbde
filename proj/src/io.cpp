#include "scqm/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace scqm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

}  // namespace

void write_csv(const std::string& path, const Matrix& table,
               const std::vector<std::string>& header) {
    if (!header.empty() && static_cast<int>(header.size()) != table.cols())
        throw std::invalid_argument("write_csv: header size does not match columns");
    std::ofstream f = open_out(path);
    for (size_t j = 0; j < header.size(); ++j)
        f << (j ? "," : "") << header[j];
    if (!header.empty()) f << "\n";
    for (int i = 0; i < table.rows(); ++i) {
        for (int j = 0; j < table.cols(); ++j)
            f << (j ? "," : "") << format_double(table(i, j));
        f << "\n";
    }
    if (!f) throw IoError("write failed: " + path);
}

Matrix read_csv(const std::string& path, std::vector<std::string>* header) {
    std::ifstream f = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    size_t width = 0;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        std::vector<double> vals(cells.size());
        bool numeric = true;
        for (size_t j = 0; j < cells.size(); ++j)
            if (!parse_double(cells[j], vals[j])) {
                numeric = false;
                break;
            }
        if (first) {
            first = false;
            if (!numeric) {
                if (header) {
                    header->clear();
                    for (const auto& c : cells) header->push_back(trim(c));
                }
                width = cells.size();
                continue;
            }
            if (header) header->clear();
        }
        if (!numeric)
            throw IoError("non-numeric cell in " + path + ": " + line);
        if (width == 0) width = vals.size();
        if (vals.size() != width)
            throw IoError("ragged row in " + path + ": " + line);
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw IoError("no data rows in " + path);
    Matrix out(static_cast<int>(rows.size()), static_cast<int>(width));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < width; ++j)
            out(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return out;
}

namespace {

std::vector<std::string> coord_header(int D) {
    std::vector<std::string> h(static_cast<size_t>(D));
    for (int j = 0; j < D; ++j) h[static_cast<size_t>(j)] = "x" + std::to_string(j);
    return h;
}

}  // namespace

void write_dataset(const std::string& dir, const Dataset& ds) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir);
    const int D = ds.ambient_dim();
    write_csv((fs::path(dir) / "data.csv").string(), ds.X.transpose(), coord_header(D));
    if (ds.X_clean)
        write_csv((fs::path(dir) / "data_clean.csv").string(),
                  ds.X_clean->transpose(), coord_header(D));
    json meta;
    meta["generator"] = ds.meta.generator;
    meta["seed"] = ds.meta.seed;
    meta["params"] = json::object();
    for (const auto& [k, v] : ds.meta.params) meta["params"][k] = v;
    std::ofstream f = open_out((fs::path(dir) / "meta.json").string());
    f << meta.dump(2) << "\n";
    if (!f) throw IoError("write failed: meta.json in " + dir);
}

Dataset read_dataset_csv(const std::string& path) {
    Dataset ds;
    ds.X = read_csv(path).transpose();
    if (ds.X.cols() == 0) throw IoError("empty dataset: " + path);
    if (!ds.X.allFinite()) throw IoError("non-finite entries in dataset: " + path);
    fs::path p(path);
    fs::path clean = p.parent_path() / (p.stem().string() + "_clean" + p.extension().string());
    if (fs::exists(clean)) {
        Matrix Xc = read_csv(clean.string()).transpose();
        if (Xc.rows() == ds.X.rows() && Xc.cols() == ds.X.cols()) ds.X_clean = Xc;
    }
    ds.meta.generator = "csv:" + path;
    return ds;
}

void save_model(const std::string& path, const QuadraticModel& model,
                const LossSpec& loss) {
    model.validate();
    json j;
    j["dims"] = {{"D", model.ambient_dim()}, {"d", model.d}, {"s", model.s}};
    j["c"] = std::vector<double>(model.c.data(), model.c.data() + model.c.size());
    // Eigen stores column-major; the flat dump is the documented layout.
    j["Q"] = std::vector<double>(model.Q.data(), model.Q.data() + model.Q.size());
    std::vector<double> theta;
    theta.reserve(static_cast<size_t>(model.Theta.size()));
    for (int i = 0; i < model.Theta.rows(); ++i)
        for (int k = 0; k < model.Theta.cols(); ++k) theta.push_back(model.Theta(i, k));
    j["Theta"] = theta;
    j["loss"] = loss.to_string();
    j["vech_ordering"] = "rowmajor-upper";
    std::ofstream f = open_out(path);
    f << j.dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

std::pair<QuadraticModel, LossSpec> load_model(const std::string& path) {
    std::ifstream f = open_in(path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw IoError("invalid model JSON in " + path + ": " + e.what());
    }
    try {
        const int D = j.at("dims").at("D").get<int>();
        const int d = j.at("dims").at("d").get<int>();
        const int s = j.at("dims").at("s").get<int>();
        if (j.at("vech_ordering").get<std::string>() != "rowmajor-upper")
            throw IoError("unsupported vech ordering in " + path);
        QuadraticModel model;
        model.d = d;
        model.s = s;
        const auto c = j.at("c").get<std::vector<double>>();
        const auto q = j.at("Q").get<std::vector<double>>();
        const auto theta = j.at("Theta").get<std::vector<double>>();
        const int m = vech_size(d);
        if (static_cast<int>(c.size()) != D ||
            static_cast<int>(q.size()) != D * (d + s) ||
            static_cast<int>(theta.size()) != m * s)
            throw IoError("model array sizes inconsistent with dims in " + path);
        model.c = Eigen::Map<const Vector>(c.data(), D);
        model.Q = Eigen::Map<const Matrix>(q.data(), D, d + s);
        model.Theta.resize(m, s);
        size_t pos = 0;
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < s; ++k) model.Theta(i, k) = theta[pos++];
        try {
            model.validate();
        } catch (const std::invalid_argument& e) {
            throw IoError("model in " + path + " fails validation: " + e.what());
        }
        LossSpec loss = LossSpec::parse(j.at("loss").get<std::string>());
        return {model, loss};
    } catch (const json::exception& e) {
        throw IoError("invalid model JSON in " + path + ": " + e.what());
    }
}

void write_trace_csv(const std::string& path, const FitTrace& trace) {
    std::ofstream f = open_out(path);
    f << "iteration,objective,eta_Q,eta_Theta,eta_c,mean_eta_tau,"
         "res_Q,res_Theta,res_c,res_tau_max\n";
    for (const IterationStat& st : trace.iterations) {
        f << st.iteration << ',' << format_double(st.objective) << ','
          << format_double(st.eta_q) << ',' << format_double(st.eta_theta) << ','
          << format_double(st.eta_c) << ',' << format_double(st.mean_eta_tau) << ','
          << format_double(st.res_q) << ',' << format_double(st.res_theta) << ','
          << format_double(st.res_c) << ',' << format_double(st.res_tau_max) << "\n";
    }
    if (!f) throw IoError("write failed: " + path);
}

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream f = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') continue;  // section headers are cosmetic
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) + " in " + path +
                          " is not key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (val.size() >= 2 && ((val.front() == '"' && val.back() == '"') ||
                                (val.front() == '\'' && val.back() == '\'')))
            val = val.substr(1, val.size() - 2);
        if (key.empty())
            throw IoError("config line " + std::to_string(lineno) + " in " + path +
                          " has empty key");
        kv[key] = val;
    }
    return kv;
}

void write_config(const std::string& path,
                  const std::map<std::string, std::string>& kv) {
    std::ofstream f = open_out(path);
    for (const auto& [k, v] : kv) f << k << " = " << v << "\n";
    if (!f) throw IoError("write failed: " + path);
}

namespace {

double want_double(const std::map<std::string, std::string>& kv, const std::string& key) {
    double v = 0.0;
    if (!parse_double(kv.at(key), v))
        throw std::invalid_argument("config: cannot parse " + key + " = " + kv.at(key));
    return v;
}

}  // namespace

void apply_fit_config(FitConfig& cfg, const std::map<std::string, std::string>& kv) {
    const auto has = [&](const char* k) { return kv.count(k) != 0; };
    if (has("max_iters")) cfg.max_iters = static_cast<int>(want_double(kv, "max_iters"));
    if (has("tol")) cfg.tol = want_double(kv, "tol");
    if (has("eta_q")) cfg.eta_q = want_double(kv, "eta_q");
    if (has("eta_theta")) cfg.eta_theta = want_double(kv, "eta_theta");
    if (has("eta_c")) cfg.eta_c = want_double(kv, "eta_c");
    if (has("eta_tau")) cfg.eta_tau = want_double(kv, "eta_tau");
    if (has("armijo_alpha")) cfg.armijo_alpha = want_double(kv, "armijo_alpha");
    if (has("shrink")) cfg.shrink = want_double(kv, "shrink");
    if (has("growth")) cfg.growth = want_double(kv, "growth");
    if (has("max_backtracks"))
        cfg.max_backtracks = static_cast<int>(want_double(kv, "max_backtracks"));
    if (has("seed")) cfg.seed = static_cast<std::uint64_t>(want_double(kv, "seed"));
    if (has("theta_init_sigma")) cfg.theta_init_sigma = want_double(kv, "theta_init_sigma");
    cfg.validate();
}

std::map<std::string, std::string> fit_config_to_map(const FitConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["max_iters"] = std::to_string(cfg.max_iters);
    kv["tol"] = format_double(cfg.tol);
    kv["eta_q"] = format_double(cfg.eta_q);
    kv["eta_theta"] = format_double(cfg.eta_theta);
    kv["eta_c"] = format_double(cfg.eta_c);
    kv["eta_tau"] = format_double(cfg.eta_tau);
    kv["armijo_alpha"] = format_double(cfg.armijo_alpha);
    kv["shrink"] = format_double(cfg.shrink);
    kv["growth"] = format_double(cfg.growth);
    kv["max_backtracks"] = std::to_string(cfg.max_backtracks);
    kv["seed"] = std::to_string(cfg.seed);
    kv["theta_init_sigma"] = format_double(cfg.theta_init_sigma);
    return kv;
}

}  // namespace scqm
