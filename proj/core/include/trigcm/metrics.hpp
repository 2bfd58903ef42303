#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "trigcm/pointcloud.hpp"

namespace trigcm {

enum class Distance { cd, emd };
enum class DistanceSelection { cd, emd, both };
enum class EvalNormalization { none, per_shape };

std::string_view to_string(Distance d);
std::string_view to_string(DistanceSelection d);
std::string_view to_string(EvalNormalization n);
DistanceSelection parse_distance_selection(std::string_view text);
EvalNormalization parse_eval_normalization(std::string_view text);

struct EmdOptions {
    std::size_t exact_limit = 512;  // exact solver up to this many points
    double tolerance = 0.01;        // certified relative gap for the auction solver
    bool per_point = true;          // divide the matching cost by M
};

// Minimum-cost bijection under Euclidean (unsquared) point distances.
// Throws ShapeError when the clouds differ in size.
double emd(const Points& a, const Points& b, const EmdOptions& opts = {});
double emd(const PointCloud& a, const PointCloud& b, const EmdOptions& opts = {});

// rows x cols, row-major.
struct DistanceMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

double cloud_distance(const PointCloud& a, const PointCloud& b, Distance d, const EmdOptions& opts = {});

// Distances between every cloud of `a` and every cloud of `b`.
DistanceMatrix pairwise(const std::vector<PointCloud>& a, const std::vector<PointCloud>& b, Distance d,
                        const EmdOptions& opts = {});

// Symmetric distances within gen ++ ref (gen first), upper triangle
// computed once and mirrored.
DistanceMatrix joint_distances(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
                               const EmdOptions& opts = {});

// Leave-one-out 1-NN accuracy in percent over gen ++ ref. Ties resolve to
// the lowest global index. Requires |gen| = |ref| >= 2.
double one_nna(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
               const EmdOptions& opts = {});
double one_nna_from_joint(const DistanceMatrix& joint, std::size_t n_gen);

struct MmdCov {
    double mmd = 0.0;  // mean over ref of the closest gen distance
    double cov = 0.0;  // percent of ref claimed as some gen's nearest
};

MmdCov mmd_cov(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
               const EmdOptions& opts = {});
// `gen_to_ref` is |gen| x |ref|.
MmdCov mmd_cov_from_matrix(const DistanceMatrix& gen_to_ref);

// Normalized occupancy histogram over resolution^3 voxels of [-1, 1]^3,
// pooling every point of every cloud. Throws DomainError for points
// outside the cube.
std::vector<double> voxel_histogram(const std::vector<PointCloud>& clouds, std::size_t resolution);

// Jensen-Shannon divergence in nats; 0 log 0 = 0.
double jsd_from_histograms(const std::vector<double>& p, const std::vector<double>& q);
double jsd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, std::size_t resolution = 28);

struct EvalOptions {
    DistanceSelection dist = DistanceSelection::cd;
    EvalNormalization normalization = EvalNormalization::none;
    std::size_t jsd_resolution = 28;
    bool compute_jsd = true;
    EmdOptions emd;
    std::uint64_t seed = 0;  // recorded only; evaluation is deterministic
};

struct MetricReport {
    std::optional<double> one_nna_cd;
    std::optional<double> one_nna_emd;
    std::optional<double> mmd_cd;
    std::optional<double> mmd_emd;
    std::optional<double> cov_cd;
    std::optional<double> cov_emd;
    std::optional<double> jsd;
    std::size_t n_gen = 0;
    std::size_t n_ref = 0;
    std::uint64_t seed = 0;
};

// Each cloud mapped into [-1, 1]^3 by its own bounding box.
std::vector<PointCloud> normalize_per_shape(const std::vector<PointCloud>& clouds);

// For JSD, points outside [-1, 1]^3 are clamped onto the cube before
// binning; distances use the clouds as given.
MetricReport evaluate(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref,
                      const EvalOptions& opts = {});

void write_report_csv(std::ostream& out, const MetricReport& report);
void write_report_table(std::ostream& out, const MetricReport& report);

}  // namespace trigcm
