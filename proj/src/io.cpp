#include "aet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace aet {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + what + ": '" + token + "'");
    }
}

long long parse_int(const std::string& token, const std::string& what) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + what + ": '" + token + "'");
    }
}

bool parse_bool(const std::string& token, const std::string& what) {
    if (token == "true" || token == "1") return true;
    if (token == "false" || token == "0") return false;
    throw ConfigError("bad boolean value for " + what + ": '" + token + "'");
}

std::vector<double> parse_double_list(const std::string& token, const std::string& what) {
    std::vector<double> out;
    std::istringstream iss(token);
    std::string part;
    while (iss >> part) out.push_back(parse_double(part, what));
    return out;
}

void open_output(std::ofstream& out, const std::string& path) {
    out.open(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
}

} // namespace

PhantomSpec PhantomSpec::default_two_disks() {
    PhantomSpec spec;
    spec.kind = PhantomKind::disks;
    spec.disks = {{0.35, 0.62, 0.17, 2.0}, {0.66, 0.32, 0.14, 1.5}};
    spec.blur_radius = 2.0;
    spec.margin = 5;
    spec.lambda_bound = 4.0;
    return spec;
}

Permittivity make_phantom(const PhantomSpec& spec, const Grid& g) {
    if (spec.kind == PhantomKind::disks && !spec.rects.empty()) {
        throw ConfigError("phantom kind 'disks' cannot carry rectangles");
    }
    if (spec.kind == PhantomKind::rectangles && !spec.disks.empty()) {
        throw ConfigError("phantom kind 'rectangles' cannot carry disks");
    }
    const double lo = 1.0 / spec.lambda_bound;
    for (const auto& d : spec.disks) {
        if (d.contrast < lo || d.contrast > spec.lambda_bound) {
            throw ConfigError("disk contrast outside the admissible box");
        }
    }
    for (const auto& r : spec.rects) {
        if (r.contrast < lo || r.contrast > spec.lambda_bound) {
            throw ConfigError("rectangle contrast outside the admissible box");
        }
    }

    Eigen::VectorXd raster = Eigen::VectorXd::Constant(g.num_nodes(), 1.0);
    auto paint = [&](int i, int j, double value) {
        const int d = std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
        if (d <= spec.margin) {
            throw ConfigError("phantom inclusion touches the collar");
        }
        raster[g.index(i, j)] = value;
    };
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            const double y = g.y(j);
            for (const auto& d : spec.disks) {
                const double dx = x - d.cx;
                const double dy = y - d.cy;
                if (dx * dx + dy * dy <= d.radius * d.radius) paint(i, j, d.contrast);
            }
            for (const auto& r : spec.rects) {
                if (x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1) paint(i, j, r.contrast);
            }
        }
    }

    Eigen::VectorXd values = raster;
    if (spec.blur_radius > 0.0) {
        const double sigma = spec.blur_radius;
        const int reach = static_cast<int>(std::ceil(3.0 * sigma));
        std::vector<double> kernel(2 * reach + 1);
        for (int k = -reach; k <= reach; ++k) {
            kernel[k + reach] = std::exp(-0.5 * (k / sigma) * (k / sigma));
        }
        // Separable pass with edge renormalization: constants stay constant.
        auto blur_axis = [&](const Eigen::VectorXd& in, bool along_x) {
            Eigen::VectorXd out(g.num_nodes());
            for (int j = 0; j < g.n; ++j) {
                for (int i = 0; i < g.n; ++i) {
                    const int c = along_x ? i : j;
                    double acc = 0.0, wsum = 0.0;
                    for (int k = -reach; k <= reach; ++k) {
                        const int cc = c + k;
                        if (cc < 0 || cc >= g.n) continue;
                        const double w = kernel[k + reach];
                        acc += w * (along_x ? in[g.index(cc, j)] : in[g.index(i, cc)]);
                        wsum += w;
                    }
                    out[g.index(i, j)] = acc / wsum;
                }
            }
            return out;
        };
        values = blur_axis(blur_axis(values, true), false);
    }

    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int k = g.index(i, j);
            const int d = std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
            if (d < spec.margin) {
                values[k] = 1.0;
            } else {
                values[k] = std::min(std::max(values[k], lo), spec.lambda_bound);
            }
        }
    }
    return Permittivity(ScalarField(g, std::move(values)), spec.lambda_bound, spec.margin);
}

namespace {

void write_field_header(std::ofstream& out, int n, const char* kind) {
    out << "AETF 1\n" << "n " << n << "\n" << "kind " << kind << "\n";
}

} // namespace

void write_field(const ScalarField& f, const std::string& path) {
    std::ofstream out;
    open_output(out, path);
    write_field_header(out, f.grid().n, "real");
    for (int k = 0; k < f.size(); ++k) out << fmt17(f.values()[k]) << "\n";
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_field(const ComplexField& f, const std::string& path) {
    std::ofstream out;
    open_output(out, path);
    write_field_header(out, f.grid().n, "complex");
    for (int k = 0; k < f.size(); ++k) {
        out << fmt17(f.values()[k].real()) << " " << fmt17(f.values()[k].imag()) << "\n";
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

std::variant<ScalarField, ComplexField> read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    int lineno = 0;

    auto next_line = [&]() {
        if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno + 1);
        ++lineno;
        return line;
    };

    if (trim(next_line()) != "AETF 1") throw ParseError("bad magic, expected 'AETF 1'", lineno);

    std::istringstream nss(next_line());
    std::string tag;
    int n = 0;
    if (!(nss >> tag >> n) || tag != "n" || n < 3) throw ParseError("bad grid line", lineno);

    std::istringstream kss(next_line());
    std::string kind;
    if (!(kss >> tag >> kind) || tag != "kind" || (kind != "real" && kind != "complex")) {
        throw ParseError("bad kind line", lineno);
    }

    const Grid g = make_grid(n);
    const bool complex_kind = (kind == "complex");
    Eigen::VectorXd re(g.num_nodes()), im(g.num_nodes());
    for (int k = 0; k < g.num_nodes(); ++k) {
        std::istringstream vss(next_line());
        double a = 0.0, b = 0.0;
        if (complex_kind) {
            if (!(vss >> a >> b)) throw ParseError("expected two values", lineno);
        } else {
            if (!(vss >> a)) throw ParseError("expected one value", lineno);
        }
        std::string rest;
        if (vss >> rest) throw ParseError("trailing token '" + rest + "'", lineno);
        if (!std::isfinite(a) || !std::isfinite(b)) {
            throw ParseError("non-finite value", lineno);
        }
        re[k] = a;
        im[k] = b;
    }
    if (complex_kind) {
        Eigen::VectorXcd v(g.num_nodes());
        v.real() = re;
        v.imag() = im;
        return ComplexField(g, std::move(v));
    }
    return ScalarField(g, std::move(re));
}

ScalarField read_scalar_field(const std::string& path) {
    auto any = read_field(path);
    if (auto* f = std::get_if<ScalarField>(&any)) return *f;
    throw Error("'" + path + "' holds a complex field, expected real");
}

ComplexField read_complex_field(const std::string& path) {
    auto any = read_field(path);
    if (auto* f = std::get_if<ComplexField>(&any)) return *f;
    throw Error("'" + path + "' holds a real field, expected complex");
}

void write_trace_csv(const ReconstructionTrace& trace, const std::string& path) {
    std::ofstream out;
    open_output(out, path);
    out << "iter,J,rel_err_l2,rel_err_h1,step_accepted\n";
    for (const auto& r : trace.records) {
        out << r.iteration << "," << fmt17(r.j_value) << ",";
        if (std::isfinite(r.rel_err_l2)) out << fmt17(r.rel_err_l2);
        out << ",";
        if (std::isfinite(r.rel_err_h1)) out << fmt17(r.rel_err_h1);
        out << "," << (r.step_accepted ? 1 : 0) << "\n";
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<IterationRecord> read_trace_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty trace file", 1);
    ++lineno;
    if (trim(line) != "iter,J,rel_err_l2,rel_err_h1,step_accepted") {
        throw ParseError("bad trace header", lineno);
    }
    std::vector<IterationRecord> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> cols;
        std::string cell;
        std::istringstream lss(line);
        while (std::getline(lss, cell, ',')) cols.push_back(cell);
        if (cols.size() == 4) cols.push_back(""); // trailing empty column
        if (cols.size() != 5) throw ParseError("expected 5 columns", lineno);
        IterationRecord r;
        r.iteration = static_cast<int>(parse_int(trim(cols[0]), "iter"));
        r.j_value = parse_double(trim(cols[1]), "J");
        r.rel_err_l2 = trim(cols[2]).empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : parse_double(trim(cols[2]), "rel_err_l2");
        r.rel_err_h1 = trim(cols[3]).empty()
                           ? std::numeric_limits<double>::quiet_NaN()
                           : parse_double(trim(cols[3]), "rel_err_h1");
        r.step_accepted = parse_int(trim(cols[4]), "step_accepted") != 0;
        records.push_back(r);
    }
    return records;
}

void render_pgm(const ScalarField& f, const std::string& path,
                std::optional<std::pair<double, double>> range) {
    const Grid& g = f.grid();
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else {
        lo = f.values().minCoeff();
        hi = f.values().maxCoeff();
    }
    const bool constant_field = (f.values().minCoeff() == f.values().maxCoeff());
    if (lo == hi && !(constant_field && !range)) {
        throw Error("render_pgm: degenerate range for a non-constant field");
    }

    std::ofstream out;
    open_output(out, path);
    out << "P2\n" << g.n << " " << g.n << "\n255\n";
    for (int j = g.n - 1; j >= 0; --j) { // top image row = y = 1
        for (int i = 0; i < g.n; ++i) {
            int pix;
            if (lo == hi) {
                pix = 128;
            } else {
                const double t = (f(i, j) - lo) / (hi - lo) * 255.0;
                pix = static_cast<int>(std::lround(t));
                pix = std::min(std::max(pix, 0), 255);
            }
            out << pix << (i + 1 == g.n ? "\n" : " ");
        }
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

PhantomSpec RunConfig::phantom_spec() const {
    PhantomSpec spec;
    if (disks.empty() && rects.empty()) {
        spec = PhantomSpec::default_two_disks();
    } else {
        spec.disks = disks;
        spec.rects = rects;
        if (!disks.empty() && !rects.empty()) {
            spec.kind = PhantomKind::composite;
        } else if (!rects.empty()) {
            spec.kind = PhantomKind::rectangles;
        } else {
            spec.kind = PhantomKind::disks;
        }
    }
    spec.blur_radius = blur_radius;
    spec.margin = margin;
    spec.lambda_bound = lambda_bound;
    return spec;
}

FrequencySet RunConfig::frequency_set() const {
    if (!freqs.empty()) {
        FrequencySet set;
        set.omegas = freqs;
        double prev = -1.0;
        for (double w : set.omegas) {
            if (w < 0.0 || w <= prev) {
                throw ConfigError("freqs must be strictly increasing and nonnegative");
            }
            prev = w;
        }
        return set;
    }
    return frequency_grid(k_min, k_max, k_count);
}

GradientPairing RunConfig::gradient_pairing() const {
    GradientPairing p;
    p.kind = pairing;
    p.alpha = sobolev_alpha;
    return p;
}

LandweberConfig RunConfig::landweber() const {
    LandweberConfig c;
    c.step_h = step_h;
    c.max_iterations = max_iterations;
    c.lambda_bound = lambda_bound;
    c.margin = margin;
    c.pairing = gradient_pairing();
    c.stop_tolerance = stop_tolerance;
    c.line_search = line_search;
    c.seed = seed;
    return c;
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (size_t k = 0; k < v.size(); ++k) {
        if (k) out += " ";
        out += fmt17(v[k]);
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::to_key_values() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("blur_radius", fmt17(blur_radius));
    for (size_t k = 0; k < disks.size(); ++k) {
        kv.emplace_back("disk_" + std::to_string(k + 1),
                        fmt17(disks[k].cx) + " " + fmt17(disks[k].cy) + " " +
                            fmt17(disks[k].radius) + " " + fmt17(disks[k].contrast));
    }
    kv.emplace_back("data_manifest", data_manifest);
    kv.emplace_back("dot_trials", std::to_string(dot_trials));
    kv.emplace_back("format_version", std::to_string(format_version));
    if (!freqs.empty()) kv.emplace_back("freqs", join_doubles(freqs));
    kv.emplace_back("grid_n", std::to_string(grid_n));
    kv.emplace_back("k_count", std::to_string(k_count));
    kv.emplace_back("k_max", fmt17(k_max));
    kv.emplace_back("k_min", fmt17(k_min));
    kv.emplace_back("lambda", fmt17(lambda_bound));
    kv.emplace_back("line_search", line_search ? "true" : "false");
    kv.emplace_back("margin", std::to_string(margin));
    kv.emplace_back("max_iterations", std::to_string(max_iterations));
    kv.emplace_back("noise_level", fmt17(noise_level));
    kv.emplace_back("noise_seed", std::to_string(noise_seed));
    kv.emplace_back("output_dir", output_dir);
    kv.emplace_back("pairing", pairing == PairingKind::l2 ? "l2" : "sobolev");
    kv.emplace_back("phi", fmt17(phi_value));
    kv.emplace_back("probe_iterations", std::to_string(probe_iterations));
    for (size_t k = 0; k < rects.size(); ++k) {
        kv.emplace_back("rect_" + std::to_string(k + 1),
                        fmt17(rects[k].x0) + " " + fmt17(rects[k].y0) + " " +
                            fmt17(rects[k].x1) + " " + fmt17(rects[k].y1) + " " +
                            fmt17(rects[k].contrast));
    }
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("sobolev_alpha", fmt17(sobolev_alpha));
    kv.emplace_back("step_h", fmt17(step_h));
    kv.emplace_back("stop_tolerance", fmt17(stop_tolerance));
    kv.emplace_back("truth_field", truth_field);
    return kv;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "grid_n") {
        cfg.grid_n = static_cast<int>(parse_int(value, key));
    } else if (key == "lambda") {
        cfg.lambda_bound = parse_double(value, key);
    } else if (key == "margin") {
        cfg.margin = static_cast<int>(parse_int(value, key));
    } else if (key == "blur_radius") {
        cfg.blur_radius = parse_double(value, key);
    } else if (key.rfind("disk_", 0) == 0) {
        const auto v = parse_double_list(value, key);
        if (v.size() != 4) throw ConfigError(key + " needs 'cx cy radius contrast'");
        cfg.disks.push_back({v[0], v[1], v[2], v[3]});
    } else if (key.rfind("rect_", 0) == 0) {
        const auto v = parse_double_list(value, key);
        if (v.size() != 5) throw ConfigError(key + " needs 'x0 y0 x1 y1 contrast'");
        cfg.rects.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else if (key == "k_min") {
        cfg.k_min = parse_double(value, key);
    } else if (key == "k_max") {
        cfg.k_max = parse_double(value, key);
    } else if (key == "k_count") {
        cfg.k_count = static_cast<int>(parse_int(value, key));
    } else if (key == "freqs") {
        cfg.freqs = parse_double_list(value, key);
    } else if (key == "phi") {
        cfg.phi_value = parse_double(value, key);
    } else if (key == "noise_level") {
        cfg.noise_level = parse_double(value, key);
    } else if (key == "noise_seed") {
        cfg.noise_seed = static_cast<unsigned long long>(parse_int(value, key));
    } else if (key == "step_h") {
        cfg.step_h = parse_double(value, key);
    } else if (key == "max_iterations") {
        cfg.max_iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "line_search") {
        cfg.line_search = parse_bool(value, key);
    } else if (key == "stop_tolerance") {
        cfg.stop_tolerance = parse_double(value, key);
    } else if (key == "pairing") {
        if (value == "l2") {
            cfg.pairing = PairingKind::l2;
        } else if (value == "sobolev") {
            cfg.pairing = PairingKind::sobolev;
        } else {
            throw ConfigError("pairing must be 'l2' or 'sobolev', got '" + value + "'");
        }
    } else if (key == "sobolev_alpha") {
        cfg.sobolev_alpha = parse_double(value, key);
    } else if (key == "seed") {
        cfg.seed = static_cast<unsigned long long>(parse_int(value, key));
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "truth_field") {
        cfg.truth_field = value;
    } else if (key == "data_manifest") {
        cfg.data_manifest = value;
    } else if (key == "probe_iterations") {
        cfg.probe_iterations = static_cast<int>(parse_int(value, key));
    } else if (key == "dot_trials") {
        cfg.dot_trials = static_cast<int>(parse_int(value, key));
    } else if (key == "format_version") {
        if (parse_int(value, key) != 1) throw ConfigError("unsupported format_version " + value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value' at " + path + ":" +
                              std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("empty key at " + path + ":" + std::to_string(lineno));
        }
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

void write_manifest(const RunConfig& cfg, const std::string& path) {
    std::ofstream out;
    open_output(out, path);
    for (const auto& [key, value] : cfg.to_key_values()) {
        out << key << " = " << value << "\n";
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_dataset(const InternalData& data, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream out;
    open_output(out, (fs::path(dir) / "dataset.cfg").string());
    out << "format_version = 1\n";
    out << "count = " << data.entries.size() << "\n";
    out << "noise_level = " << fmt17(data.noise_level) << "\n";
    out << "noise_seed = " << data.seed << "\n";
    for (size_t k = 0; k < data.entries.size(); ++k) {
        const std::string name = "psi_" + std::to_string(k + 1) + ".field";
        write_field(data.entries[k].psi_star, (fs::path(dir) / name).string());
        out << "omega_" << (k + 1) << " = " << fmt17(data.entries[k].omega) << "\n";
        out << "file_" << (k + 1) << " = " << name << "\n";
    }
    if (!out) throw Error("write failed for dataset index in '" + dir + "'");
}

InternalData read_dataset(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dataset index '" + manifest_path + "'");
    const fs::path base = fs::path(manifest_path).parent_path();

    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("dataset index misses key '" + key + "'");
        return it->second;
    };

    InternalData data;
    const long long count = parse_int(need("count"), "count");
    data.noise_level = parse_double(need("noise_level"), "noise_level");
    data.seed = static_cast<unsigned long long>(parse_int(need("noise_seed"), "noise_seed"));
    for (long long k = 1; k <= count; ++k) {
        InternalData::Entry entry;
        entry.omega = parse_double(need("omega_" + std::to_string(k)), "omega");
        entry.psi_star =
            read_scalar_field((base / need("file_" + std::to_string(k))).string());
        data.entries.push_back(std::move(entry));
    }
    data.validate();
    return data;
}

} // namespace aet
