#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfqed/fiber_dispersion.hpp"
#include "nfqed/green_fiber.hpp"
#include "nfqed/types.hpp"

namespace nfqed {

/// Samples f(x_n) on the uniform grid x_n = x0 + n dx, x = omega / omega_a.
/// For coupling tables f = (3 pi / k_a) d_a^dagger Im G(x omega_a) d_b, so
/// that f(1) = Gamma_ab / 2 in units of gamma.
struct SpectralTable {
    double x0 = 0.0;
    double dx = 0.0;
    std::vector<cplx> values;
    std::string generator = "synthetic";  // vacuum | fiber-radiation | synthetic
    double r_tilde_over_lambda = 0.0;     // pair separation, 0 if not applicable

    double x_at(std::size_t n) const { return x0 + static_cast<double>(n) * dx; }
    double x_max() const { return values.empty() ? x0 : x_at(values.size() - 1); }
    void validate() const;
};

enum class PvKind { DirectCutoff, FourierAveraged };

struct PvStrategy {
    PvKind kind = PvKind::FourierAveraged;
    double x_c = 0.0;  // DirectCutoff
    double x_min_c = 0.0, x_max_c = 0.0;
    int n_cutoffs = 32;

    static PvStrategy direct(double x_c);
    static PvStrategy averaged(double x_min_c, double x_max_c, int n_cutoffs = 32);
    /// Cutoff window [2, 10] lambda_a / r_tilde. When that window would start
    /// below 1.5 it is moved up to start there, keeping its width.
    static PvStrategy default_for(double r_tilde_over_lambda, PvKind kind = PvKind::FourierAveraged);

    double x_max() const { return kind == PvKind::DirectCutoff ? x_c : x_max_c; }
    void validate() const;
};

/// P int_{x0}^{x_c} f(x) [1/(x-1) + fold/(x+1)] dx with the constant and
/// linear parts of f at x = 1 integrated in closed form and the remainder by
/// composite Simpson. The cell holding x_c is integrated with f interpolated
/// linearly.
cplx pv_direct(const SpectralTable& t, double x_c, bool fold = true);

/// Same integral with the 1/(x -+ 1) factors replaced by the truncated
/// transform 2 sin^2(u T/2)/u, T = pi / dx (the conjugate-grid limit), and
/// trapezoid weights, which on this grid is the alternating-point rule.
cplx pv_fourier(const SpectralTable& t, double x_c, bool fold = true);

/// Mean of pv_fourier over cutoffs at the midpoints of n_cutoffs equal
/// subintervals of [x_min_c, x_max_c].
cplx pv_fourier_averaged(const SpectralTable& t, const PvStrategy& s, bool fold = true);

cplx pv_apply(const SpectralTable& t, const PvStrategy& s, bool fold = true);

/// Grid spacing 1/p with p = max(50, ceil(8 r_tilde / lambda_a)).
double default_grid_step(double r_tilde_over_lambda);

/// Least-squares slope of log |local maxima of |f|| against log x for x >= x_from.
double fit_envelope_exponent(const SpectralTable& t, double x_from);

// ------------------------------------------------------------ tables

/// Two emitters and their dipoles.
struct PairSpec {
    CylPoint a, b;
    Vec3c d_a, d_b;
};

SpectralTable vacuum_table(const PairSpec& p, double omega_a, double dx, double x_max);

/// Disk cache of fiber-radiation series. Files are keyed by a 64-bit FNV-1a
/// hash of a canonical description and store that description, so a
/// collision or a foreign file is detected. Writes go to a temporary file
/// that is renamed into place.
class SpectralCache {
public:
    explicit SpectralCache(std::string dir);
    const std::string& dir() const { return dir_; }

    /// nullopt when absent; CacheError when present but unreadable.
    std::optional<std::vector<cplx>> load(const std::string& key) const;
    void store(const std::string& key, const std::vector<cplx>& values) const;
    std::string path_for(const std::string& key) const;

    static std::uint64_t hash(const std::string& key);
    static constexpr std::uint32_t format_version = 1;

private:
    std::string dir_;
};

struct TableRequest {
    PairSpec pair;
    double x_max = 0.0;
};

struct TableBuildInfo {
    int computed_series = 0;
    int cached_series = 0;
    double worst_certificate = 0.0;  // largest achieved tolerance at the certified samples
};

/// Fiber-radiation tables for several pairs on one grid, sharing each
/// frequency's radiation-mode evaluation between the pairs still below their
/// x_max. Certificates run at x = 1 and at a few further samples; the rest use
/// the resolved orders directly. Samples are split over worker threads.
std::vector<SpectralTable> build_radiation_tables(const FiberSpec& fiber, const std::vector<TableRequest>& req,
                                                  double omega_a, double dx, const RadiationQuadratureSpec& quad,
                                                  const SpectralCache* cache = nullptr,
                                                  TableBuildInfo* info = nullptr);

/// Worker-thread cap for table construction; 0 means hardware concurrency.
void set_worker_threads(int n);
int worker_threads();

/// V^rd_ab / gamma from a fiber-radiation table: pv / pi plus the
/// longitudinal vacuum term (3 pi / k_a) d_a^dagger G0_par d_b.
cplx v_from_table(const SpectralTable& t, const PvStrategy& s, const PairSpec& p, double omega_a);

/// Builds (or loads) the table for one pair and applies the strategy.
/// omega_a is taken from the fiber-independent pair frequency argument.
cplx v_rd_pair(const FiberSpec& fiber, const PairSpec& p, double omega_a, const RadiationQuadratureSpec& quad,
               const PvStrategy& s, const SpectralCache* cache = nullptr);

/// The same estimator applied to the vacuum table, for benchmarking.
cplx v0_numeric(const PairSpec& p, double omega_a, const PvStrategy& s);

}  // namespace nfqed
