#include "trigcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <string>

#include "trigcm/assignment.hpp"
#include "trigcm/error.hpp"
#include "trigcm/objective.hpp"
#include "trigcm/spatial_index.hpp"

namespace trigcm {

namespace {

std::string fmt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", *v);
    return buf;
}

}  // namespace

std::string_view to_string(Distance d) { return d == Distance::emd ? "emd" : "cd"; }

std::string_view to_string(DistanceSelection d) {
    switch (d) {
        case DistanceSelection::cd: return "cd";
        case DistanceSelection::emd: return "emd";
        case DistanceSelection::both: return "both";
    }
    return "?";
}

std::string_view to_string(EvalNormalization n) { return n == EvalNormalization::per_shape ? "per_shape" : "none"; }

DistanceSelection parse_distance_selection(std::string_view text) {
    if (text == "cd") return DistanceSelection::cd;
    if (text == "emd") return DistanceSelection::emd;
    if (text == "both") return DistanceSelection::both;
    throw DomainError("unknown distance '" + std::string(text) + "' (expected cd, emd or both)");
}

EvalNormalization parse_eval_normalization(std::string_view text) {
    if (text == "none") return EvalNormalization::none;
    if (text == "per_shape") return EvalNormalization::per_shape;
    throw DomainError("unknown eval normalization '" + std::string(text) + "'");
}

double emd(const Points& a, const Points& b, const EmdOptions& opts) {
    if (a.size() != b.size()) {
        throw ShapeError("emd: clouds have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                         " points");
    }
    if (a.empty()) throw DomainError("emd: empty point cloud");
    CostMatrix c;
    c.n = a.size();
    c.cost.resize(c.n * c.n);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.n; ++j) c.cost[i * c.n + j] = std::sqrt(squared_distance(a[i], b[j]));
    const Assignment res = c.n <= opts.exact_limit ? solve_hungarian(c) : solve_auction(c, opts.tolerance);
    return opts.per_point ? res.cost / static_cast<double>(c.n) : res.cost;
}

double emd(const PointCloud& a, const PointCloud& b, const EmdOptions& opts) { return emd(a.points, b.points, opts); }

double cloud_distance(const PointCloud& a, const PointCloud& b, Distance d, const EmdOptions& opts) {
    return d == Distance::cd ? chamfer(a.points, b.points) : emd(a.points, b.points, opts);
}

DistanceMatrix pairwise(const std::vector<PointCloud>& a, const std::vector<PointCloud>& b, Distance d,
                        const EmdOptions& opts) {
    DistanceMatrix m{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m.values[i * m.cols + j] = cloud_distance(a[i], b[j], d, opts);
    return m;
}

DistanceMatrix joint_distances(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
                               const EmdOptions& opts) {
    const std::size_t n = gen.size() + ref.size();
    auto at = [&](std::size_t i) -> const PointCloud& { return i < gen.size() ? gen[i] : ref[i - gen.size()]; };
    DistanceMatrix m{n, n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = cloud_distance(at(i), at(j), d, opts);
            m.values[i * n + j] = v;
            m.values[j * n + i] = v;
        }
    }
    return m;
}

double one_nna_from_joint(const DistanceMatrix& joint, std::size_t n_gen) {
    const std::size_t n = joint.rows;
    if (joint.cols != n || n_gen > n) throw ShapeError("one_nna: joint matrix must be square");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = i;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (joint(i, j) < best_d) {
                best_d = joint(i, j);
                best = j;
            }
        }
        if ((i < n_gen) == (best < n_gen)) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(n);
}

double one_nna(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
               const EmdOptions& opts) {
    if (gen.size() != ref.size()) {
        throw ShapeError("one_nna: generated set has " + std::to_string(gen.size()) + " shapes, reference has " +
                         std::to_string(ref.size()));
    }
    if (gen.size() < 2) throw DomainError("one_nna: need at least 2 shapes per set");
    return one_nna_from_joint(joint_distances(gen, ref, d, opts), gen.size());
}

MmdCov mmd_cov_from_matrix(const DistanceMatrix& m) {
    if (m.rows == 0 || m.cols == 0) throw DomainError("mmd_cov: empty set");
    MmdCov out;
    for (std::size_t r = 0; r < m.cols; ++r) {
        double best = m(0, r);
        for (std::size_t g = 1; g < m.rows; ++g) best = std::min(best, m(g, r));
        out.mmd += best;
    }
    out.mmd /= static_cast<double>(m.cols);
    std::set<std::size_t> claimed;
    for (std::size_t g = 0; g < m.rows; ++g) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < m.cols; ++r)
            if (m(g, r) < m(g, best)) best = r;
        claimed.insert(best);
    }
    out.cov = 100.0 * static_cast<double>(claimed.size()) / static_cast<double>(m.cols);
    return out;
}

MmdCov mmd_cov(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, Distance d,
               const EmdOptions& opts) {
    if (gen.empty() || ref.empty()) throw DomainError("mmd_cov: both sets must be non-empty");
    return mmd_cov_from_matrix(pairwise(gen, ref, d, opts));
}

constexpr double kBoxSlack = 1e-12;

std::vector<double> voxel_histogram(const std::vector<PointCloud>& clouds, std::size_t resolution) {
    if (resolution == 0) throw DomainError("voxel_histogram: resolution must be positive");
    std::vector<double> h(resolution * resolution * resolution, 0.0);
    std::size_t total = 0;
    const double r = static_cast<double>(resolution);
    for (const auto& pc : clouds) {
        for (const auto& p : pc.points) {
            std::size_t idx[3];
            for (int k = 0; k < 3; ++k) {
                // Rounding in a min-max normalization can land an extreme
                // point a few ulps past the face; it goes to the edge voxel.
                if (!(std::abs(p[k]) <= 1.0 + kBoxSlack)) {
                    throw DomainError("voxel_histogram: coordinate " + std::to_string(p[k]) + " outside [-1, 1]");
                }
                const double u = std::clamp((p[k] + 1.0) * 0.5 * r, 0.0, r - 1.0);
                idx[k] = static_cast<std::size_t>(u);
            }
            h[(idx[0] * resolution + idx[1]) * resolution + idx[2]] += 1.0;
            ++total;
        }
    }
    if (total == 0) throw DomainError("voxel_histogram: no points");
    for (double& v : h) v /= static_cast<double>(total);
    return h;
}

double jsd_from_histograms(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ShapeError("jsd: histogram sizes differ");
    double out = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) out += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) out += 0.5 * q[i] * std::log(q[i] / m);
    }
    return std::max(0.0, out);
}

double jsd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, std::size_t resolution) {
    return jsd_from_histograms(voxel_histogram(gen, resolution), voxel_histogram(ref, resolution));
}

std::vector<PointCloud> normalize_per_shape(const std::vector<PointCloud>& clouds) {
    Dataset ds;
    ds.clouds = clouds;
    return normalize_minmax(ds, NormalizationMode::per_shape_minmax).clouds;
}

namespace {

// Unnormalized samples may stray outside the histogram cube; those points
// are counted in the nearest boundary voxel.
std::vector<PointCloud> clamp_to_cube(const std::vector<PointCloud>& clouds) {
    std::vector<PointCloud> out = clouds;
    for (auto& pc : out)
        for (auto& p : pc.points)
            for (double& c : p) c = std::clamp(c, -1.0, 1.0);
    return out;
}

}  // namespace

MetricReport evaluate(const std::vector<PointCloud>& gen_in, const std::vector<PointCloud>& ref_in,
                      const EvalOptions& opts) {
    if (gen_in.empty() || ref_in.empty()) throw DomainError("evaluate: both sets must be non-empty");
    if (gen_in.size() != ref_in.size()) {
        throw ShapeError("evaluate: generated set has " + std::to_string(gen_in.size()) +
                         " shapes, reference has " + std::to_string(ref_in.size()));
    }
    const bool per_shape = opts.normalization == EvalNormalization::per_shape;
    const auto gen = per_shape ? normalize_per_shape(gen_in) : gen_in;
    const auto ref = per_shape ? normalize_per_shape(ref_in) : ref_in;

    MetricReport rep;
    rep.n_gen = gen.size();
    rep.n_ref = ref.size();
    rep.seed = opts.seed;

    auto run = [&](Distance d, std::optional<double>& nna, std::optional<double>& mmd, std::optional<double>& cov) {
        const DistanceMatrix joint = joint_distances(gen, ref, d, opts.emd);
        if (gen.size() >= 2) nna = one_nna_from_joint(joint, gen.size());
        DistanceMatrix cross{gen.size(), ref.size(), std::vector<double>(gen.size() * ref.size())};
        for (std::size_t g = 0; g < gen.size(); ++g)
            for (std::size_t r = 0; r < ref.size(); ++r) cross.values[g * ref.size() + r] = joint(g, gen.size() + r);
        const MmdCov mc = mmd_cov_from_matrix(cross);
        mmd = mc.mmd;
        cov = mc.cov;
    };
    if (opts.dist != DistanceSelection::emd) run(Distance::cd, rep.one_nna_cd, rep.mmd_cd, rep.cov_cd);
    if (opts.dist != DistanceSelection::cd) run(Distance::emd, rep.one_nna_emd, rep.mmd_emd, rep.cov_emd);
    if (opts.compute_jsd) rep.jsd = jsd(clamp_to_cube(gen), clamp_to_cube(ref), opts.jsd_resolution);
    return rep;
}

void write_report_csv(std::ostream& out, const MetricReport& r) {
    out << "one_nna_cd,one_nna_emd,mmd_cd,mmd_emd,cov_cd,cov_emd,jsd,n_gen,n_ref,seed\n";
    out << fmt(r.one_nna_cd) << ',' << fmt(r.one_nna_emd) << ',' << fmt(r.mmd_cd) << ',' << fmt(r.mmd_emd) << ','
        << fmt(r.cov_cd) << ',' << fmt(r.cov_emd) << ',' << fmt(r.jsd) << ',' << r.n_gen << ',' << r.n_ref << ','
        << r.seed << '\n';
}

void write_report_table(std::ostream& out, const MetricReport& r) {
    auto row = [&](const char* name, const std::optional<double>& v, const char* unit) {
        if (!v) return;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-14s %14.6f %s\n", name, *v, unit);
        out << buf;
    };
    row("1-NNA (CD)", r.one_nna_cd, "%");
    row("1-NNA (EMD)", r.one_nna_emd, "%");
    row("MMD (CD)", r.mmd_cd, "");
    row("MMD (EMD)", r.mmd_emd, "");
    row("COV (CD)", r.cov_cd, "%");
    row("COV (EMD)", r.cov_emd, "%");
    row("JSD", r.jsd, "");
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-14s %14zu\n%-14s %14zu\n", "gen shapes", r.n_gen, "ref shapes", r.n_ref);
    out << buf;
}

}  // namespace trigcm
