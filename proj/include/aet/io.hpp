#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "aet/inversion.hpp"

namespace aet {

struct DiskInclusion {
    double cx = 0.0, cy = 0.0, radius = 0.0, contrast = 1.0;
};

struct RectInclusion {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0, contrast = 1.0;
};

enum class PhantomKind { disks, rectangles, composite };

struct PhantomSpec {
    PhantomKind kind = PhantomKind::disks;
    std::vector<DiskInclusion> disks;
    std::vector<RectInclusion> rects;
    double blur_radius = 2.0; // mollifier standard deviation, in node units
    int margin = 5;
    double lambda_bound = 4.0;

    /// Reference scenario: two smoothed disks, contrasts 2.0 and 1.5.
    static PhantomSpec default_two_disks();
};

/// Rasterize the inclusions over background 1, mollify with a normalized
/// discrete Gaussian, reset the collar to exactly 1 and clamp to the box.
/// An inclusion touching the collar band is an error.
Permittivity make_phantom(const PhantomSpec& spec, const Grid& g);

/// Text field format, 17 significant digits (value-exact round-trip):
///   AETF 1 / n <int> / kind real|complex / N value lines, row-major.
void write_field(const ScalarField& f, const std::string& path);
void write_field(const ComplexField& f, const std::string& path);
std::variant<ScalarField, ComplexField> read_field(const std::string& path);
ScalarField read_scalar_field(const std::string& path);
ComplexField read_complex_field(const std::string& path);

/// CSV trace: header iter,J,rel_err_l2,rel_err_h1,step_accepted; error columns
/// empty when no ground truth was supplied.
void write_trace_csv(const ReconstructionTrace& trace, const std::string& path);
std::vector<IterationRecord> read_trace_csv(const std::string& path);

/// ASCII PGM (P2, maxval 255), linear map of [lo, hi] to [0, 255] with
/// round-half-away-from-zero; default range is the field's min/max; a constant
/// field with no explicit range renders all-128.
void render_pgm(const ScalarField& f, const std::string& path,
                std::optional<std::pair<double, double>> range = std::nullopt);

/// Flat key = value configuration; '#' starts a comment; unknown keys rejected.
struct RunConfig {
    int grid_n = 101;
    double lambda_bound = 4.0;
    int margin = 5;
    double blur_radius = 2.0;
    std::vector<DiskInclusion> disks;  // empty -> default phantom
    std::vector<RectInclusion> rects;
    double k_min = 10.0;
    double k_max = 20.0;
    int k_count = 3;
    std::vector<double> freqs; // explicit list overrides k_min/k_max/k_count
    double phi_value = 1.0;
    double noise_level = 0.0;
    unsigned long long noise_seed = 1;
    double step_h = 0.0;
    int max_iterations = 100;
    bool line_search = true;
    double stop_tolerance = 1e-10;
    PairingKind pairing = PairingKind::l2;
    double sobolev_alpha = 1e-3;
    unsigned long long seed = 1;
    std::string output_dir = "out";
    std::string truth_field;   // optional input path
    std::string data_manifest; // dataset index for reconstruct
    int probe_iterations = 40;
    int dot_trials = 10;
    int format_version = 1;

    PhantomSpec phantom_spec() const;
    FrequencySet frequency_set() const;
    LandweberConfig landweber() const;
    GradientPairing gradient_pairing() const;

    /// Canonical (sorted, normalized) key/value echo used for manifests.
    std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

RunConfig parse_config_file(const std::string& path);
/// Apply one key = value assignment; throws ConfigError for unknown keys or
/// malformed values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);
void write_manifest(const RunConfig& cfg, const std::string& path);

/// Dataset on disk: per-frequency field files plus an index in config syntax.
void write_dataset(const InternalData& data, const std::string& dir);
InternalData read_dataset(const std::string& manifest_path);

} // namespace aet
