#include "nfqed/pv_integrator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "nfqed/constants.hpp"
#include "nfqed/errors.hpp"
#include "nfqed/green_vacuum.hpp"

namespace nfqed {

static_assert(std::endian::native == std::endian::little, "cache files are written in host byte order");

namespace {

constexpr double grid_eps = 1e-9;

// grid index of the pole x = 1; InvalidArgument unless it is a grid point
std::size_t pole_index(const SpectralTable& t) {
    const double j = (1.0 - t.x0) / t.dx;
    const double jr = std::round(j);
    if (std::abs(j - jr) > grid_eps * std::max(1.0, std::abs(j)) || jr < 0)
        throw InvalidArgument("x = 1 is not a grid point of the spectral table");
    return static_cast<std::size_t>(jr);
}

// last grid index at or below x
std::size_t index_below(const SpectralTable& t, double x) {
    const double j = std::floor((x - t.x0) / t.dx + grid_eps);
    if (j < 0) throw InvalidArgument("cutoff below the table start");
    const auto n = static_cast<std::size_t>(j);
    const bool on_grid = std::abs(x - t.x_at(n)) <= grid_eps * t.dx;
    if (n >= t.values.size() || (n + 1 == t.values.size() && !on_grid))
        throw InvalidArgument("cutoff beyond the tabulated range");
    return n;
}

// composite Simpson over y[0..n], with a 3/8 panel closing an odd interval count
cplx simpson(const std::vector<cplx>& y, std::size_t n, double h) {
    if (n == 0) return 0.0;
    if (n == 1) return 0.5 * h * (y[0] + y[1]);
    if (n == 2) return h / 3.0 * (y[0] + 4.0 * y[1] + y[2]);
    std::size_t m = n;
    cplx tail = 0.0;
    if (n % 2 == 1) {
        m = n - 3;
        tail = 3.0 * h / 8.0 * (y[m] + 3.0 * y[m + 1] + 3.0 * y[m + 2] + y[m + 3]);
    }
    cplx s = y[0] + y[m];
    for (std::size_t i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
    return h / 3.0 * s + tail;
}

// int_{x_n}^{x_c} f [1/(x-1) + fold/(x+1)] with f linear across the cell
// that contains x_c, so results vary continuously with the cutoff
cplx partial_cell(const SpectralTable& t, std::size_t n, double x_c, bool fold) {
    const double xn = t.x_at(n);
    const double d = x_c - xn;
    if (d <= 0.0) return 0.0;
    const cplx fn = t.values[n];
    const cplx s = (t.values[n + 1] - fn) / t.dx;
    cplx r = (fn + s * (1.0 - xn)) * std::log1p(d / (xn - 1.0)) + s * d;
    if (fold) r += (fn + s * (-1.0 - xn)) * std::log1p(d / (xn + 1.0)) + s * d;
    return r;
}

// truncated transform int_0^T sin(u tau) d tau = 2 sin^2(u T / 2) / u, zero at u = 0
double kernel(double u, double T) {
    if (u == 0.0) return 0.0;
    const double s = std::sin(0.5 * u * T);
    return 2.0 * s * s / u;
}

}  // namespace

void SpectralTable::validate() const {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidArgument("spectral table needs dx > 0");
    if (values.size() < 2) throw InvalidArgument("spectral table needs at least two samples");
    for (const cplx& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("non-finite spectral sample");
}

PvStrategy PvStrategy::direct(double x_c) {
    PvStrategy s;
    s.kind = PvKind::DirectCutoff;
    s.x_c = x_c;
    s.validate();
    return s;
}

PvStrategy PvStrategy::averaged(double x_min_c, double x_max_c, int n_cutoffs) {
    PvStrategy s;
    s.kind = PvKind::FourierAveraged;
    s.x_min_c = x_min_c;
    s.x_max_c = x_max_c;
    s.n_cutoffs = n_cutoffs;
    s.validate();
    return s;
}

PvStrategy PvStrategy::default_for(double r_tilde_over_lambda, PvKind kind) {
    if (!(r_tilde_over_lambda > 0.0)) throw InvalidArgument("pair separation must be positive");
    const double width = 8.0 / r_tilde_over_lambda;
    const double lo = std::max(2.0 / r_tilde_over_lambda, 1.5);
    if (kind == PvKind::DirectCutoff) return direct(lo + width);
    return averaged(lo, lo + width, 32);
}

void PvStrategy::validate() const {
    if (kind == PvKind::DirectCutoff) {
        if (!(x_c > 1.0) || !std::isfinite(x_c)) throw InvalidArgument("direct cutoff must exceed omega_a");
        return;
    }
    if (!(x_min_c > 1.0)) throw InvalidArgument("averaging window must start above omega_a");
    if (!(x_max_c > x_min_c) || !std::isfinite(x_max_c)) throw InvalidArgument("averaging window is empty");
    if (n_cutoffs < 8) throw InvalidArgument("at least 8 cutoffs are required");
}

cplx pv_direct(const SpectralTable& t, double x_c, bool fold) {
    t.validate();
    const std::size_t p = pole_index(t);
    const std::size_t nc = index_below(t, x_c);
    if (p < 2 || p + 2 > nc) throw InvalidArgument("omega_a lies within two grid cells of an integration endpoint");
    const std::vector<cplx>& f = t.values;
    const double h = t.dx;
    const cplx f1 = f[p];
    // 5-point derivative at the pole for the removable point of (f - f1) / (x - 1)
    const cplx fp = (f[p - 2] - 8.0 * f[p - 1] + 8.0 * f[p + 1] - f[p + 2]) / (12.0 * h);
    std::vector<cplx> g(nc + 1);
    for (std::size_t n = 0; n <= nc; ++n) {
        const double x = t.x_at(n);
        g[n] = (n == p) ? fp : (f[n] - f1) / (x - 1.0);
        if (fold) g[n] += f[n] / (x + 1.0);
    }
    const double hi = t.x_at(nc);
    return simpson(g, nc, h) + f1 * std::log((hi - 1.0) / (1.0 - t.x0)) + partial_cell(t, nc, x_c, fold);
}

cplx pv_fourier(const SpectralTable& t, double x_c, bool fold) {
    t.validate();
    const std::size_t p = pole_index(t);
    const std::size_t nc = index_below(t, x_c);
    if (p + 2 > nc) throw InvalidArgument("cutoff too close to omega_a");
    if (t.r_tilde_over_lambda > 0.0) {
        const double need = 1.0 / (8.0 * t.r_tilde_over_lambda);
        if (t.dx > need * (1 + grid_eps))
            throw InvalidArgument("grid too coarse for the pair separation: dx = " + std::to_string(t.dx) +
                                  ", required <= " + std::to_string(need));
    }
    const double T = pi / t.dx;
    cplx s = 0.0;
    for (std::size_t n = 0; n <= nc; ++n) {
        const double x = t.x_at(n);
        double k = kernel(x - 1.0, T);
        if (fold) k += kernel(x + 1.0, T);
        const double w = (n == 0 || n == nc) ? 0.5 : 1.0;
        s += w * k * t.values[n];
    }
    return s * t.dx + partial_cell(t, nc, x_c, fold);
}

cplx pv_fourier_averaged(const SpectralTable& t, const PvStrategy& s, bool fold) {
    if (s.kind != PvKind::FourierAveraged) throw InvalidArgument("strategy is not FourierAveraged");
    s.validate();
    cplx sum = 0.0;
    for (int i = 0; i < s.n_cutoffs; ++i) {
        // cell midpoints: a window of whole oscillation periods then cancels exactly
        const double xc = s.x_min_c + (s.x_max_c - s.x_min_c) * (i + 0.5) / s.n_cutoffs;
        sum += pv_fourier(t, xc, fold);
    }
    return sum / static_cast<double>(s.n_cutoffs);
}

cplx pv_apply(const SpectralTable& t, const PvStrategy& s, bool fold) {
    s.validate();
    return s.kind == PvKind::DirectCutoff ? pv_direct(t, s.x_c, fold) : pv_fourier_averaged(t, s, fold);
}

double default_grid_step(double r_tilde_over_lambda) {
    const double p = std::max(50.0, std::ceil(8.0 * r_tilde_over_lambda - grid_eps));
    return 1.0 / p;
}

double fit_envelope_exponent(const SpectralTable& t, double x_from) {
    std::vector<double> lx, ly;
    for (std::size_t n = 1; n + 1 < t.values.size(); ++n) {
        const double x = t.x_at(n);
        if (x < x_from) continue;
        const double a = std::abs(t.values[n]);
        if (a > std::abs(t.values[n - 1]) && a >= std::abs(t.values[n + 1]) && a > 0.0) {
            lx.push_back(std::log(x));
            ly.push_back(std::log(a));
        }
    }
    if (lx.size() < 3) throw InvalidArgument("too few envelope maxima for a fit");
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ------------------------------------------------------------ tables

namespace {

double separation(const PairSpec& p) { return (p.a.cartesian() - p.b.cartesian()).norm(); }

std::size_t sample_count(double x_max, double dx) {
    return static_cast<std::size_t>(std::floor(x_max / dx + grid_eps)) + 1;
}

}  // namespace

SpectralTable vacuum_table(const PairSpec& p, double omega_a, double dx, double x_max) {
    if (!(omega_a > 0.0) || !(dx > 0.0) || !(x_max > dx)) throw InvalidArgument("bad vacuum table grid");
    SpectralTable t;
    t.dx = dx;
    t.generator = "vacuum";
    t.r_tilde_over_lambda = separation(p) / wavelength_from_omega(omega_a);
    const std::size_t n = sample_count(x_max, dx);
    t.values.assign(n, 0.0);
    const double scale = 3.0 * pi / wavenumber(omega_a);
    const Vec3d ra = p.a.cartesian(), rb = p.b.cartesian();
    for (std::size_t i = 1; i < n; ++i) {
        const Mat3c g = im_g0(ra, rb, t.x_at(i) * omega_a).cast<cplx>();
        t.values[i] = scale * sandwich(p.d_a, g, p.d_b);
    }
    return t;
}

SpectralCache::SpectralCache(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) throw CacheError("cannot use cache directory " + dir_);
}

std::uint64_t SpectralCache::hash(const std::string& key) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string SpectralCache::path_for(const std::string& key) const {
    std::ostringstream name;
    name << std::hex << std::setw(16) << std::setfill('0') << hash(key) << ".nfqt";
    return (std::filesystem::path(dir_) / name.str()).string();
}

namespace {

constexpr char cache_magic[8] = {'N', 'F', 'Q', 'E', 'D', 'T', 'B', 'L'};

template <class T>
void put(std::string& buf, const T& v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    buf.append(b, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw CacheError("truncated cache file");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

std::optional<std::vector<cplx>> SpectralCache::load(const std::string& key) const {
    const std::string path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < sizeof(cache_magic) || std::memcmp(buf.data(), cache_magic, sizeof(cache_magic)) != 0)
        throw CacheError("not a spectral cache file: " + path);
    std::size_t pos = sizeof(cache_magic);
    if (get<std::uint32_t>(buf, pos) != format_version) throw CacheError("cache format version mismatch: " + path);
    const auto key_len = get<std::uint64_t>(buf, pos);
    if (pos + key_len > buf.size()) throw CacheError("truncated cache file: " + path);
    if (buf.compare(pos, key_len, key) != 0) throw CacheError("cache key collision: " + path);
    pos += key_len;
    const auto n = get<std::uint64_t>(buf, pos);
    const std::size_t payload = pos;
    if (n > (buf.size() - pos) / (2 * sizeof(double))) throw CacheError("truncated cache file: " + path);
    std::vector<cplx> out(n);
    for (auto& v : out) {
        const double re = get<double>(buf, pos);
        const double im = get<double>(buf, pos);
        v = {re, im};
    }
    const std::uint64_t sum = hash(buf.substr(payload, pos - payload));
    if (get<std::uint64_t>(buf, pos) != sum || pos != buf.size()) throw CacheError("cache checksum mismatch: " + path);
    return out;
}

void SpectralCache::store(const std::string& key, const std::vector<cplx>& values) const {
    std::string buf(cache_magic, sizeof(cache_magic));
    put(buf, format_version);
    put(buf, static_cast<std::uint64_t>(key.size()));
    buf += key;
    put(buf, static_cast<std::uint64_t>(values.size()));
    const std::size_t payload = buf.size();
    for (const cplx& v : values) {
        put(buf, v.real());
        put(buf, v.imag());
    }
    put(buf, hash(buf.substr(payload)));

    const std::string path = path_for(key);
    std::ostringstream tmp_name;
    tmp_name << path << ".tmp" << std::hash<std::thread::id>{}(std::this_thread::get_id());
    const std::string tmp = tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw CacheError("cannot write cache file " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw CacheError("cannot move cache file into place: " + path);
    }
}

namespace {

std::atomic<int> g_threads{0};

std::string series_key(const FiberSpec& fiber, const PairSpec& p, double omega_a, double dx, std::size_t n,
                       const RadiationQuadratureSpec& q) {
    std::ostringstream s;
    s << std::hexfloat << "fiber-radiation/v1;radius=" << fiber.radius << ";B=" << fiber.material.B[0] << ','
      << fiber.material.B[1] << ',' << fiber.material.B[2] << ";L=" << fiber.material.L_sq[0] << ','
      << fiber.material.L_sq[1] << ',' << fiber.material.L_sq[2] << ";band=" << fiber.material.valid_min_um << ','
      << fiber.material.valid_max_um << ";omega_a=" << omega_a << ";dx=" << dx << ";n=" << n
      << ";a=" << p.a.r << ',' << p.a.phi << ',' << p.a.z << ";b=" << p.b.r << ',' << p.b.phi << ',' << p.b.z;
    for (const Vec3c* d : {&p.d_a, &p.d_b})
        for (int i = 0; i < 3; ++i) s << ";d=" << (*d)(i).real() << ',' << (*d)(i).imag();
    s << ";m_cut=" << q.m_cut << ";theta=" << q.theta_order << ";tol=" << q.rel_tol << ";refine=" << q.max_refinements;
    return s.str();
}

}  // namespace

void set_worker_threads(int n) {
    if (n < 0) throw InvalidArgument("thread count must be non-negative");
    g_threads = n;
}

int worker_threads() {
    const int n = g_threads.load();
    if (n > 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SpectralTable> build_radiation_tables(const FiberSpec& fiber, const std::vector<TableRequest>& req,
                                                  double omega_a, double dx, const RadiationQuadratureSpec& quad,
                                                  const SpectralCache* cache, TableBuildInfo* info) {
    if (!(omega_a > 0.0) || !(dx > 0.0)) throw InvalidArgument("bad table grid");
    if (!(quad.rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
    const double lambda_a = wavelength_from_omega(omega_a);
    const double scale = 3.0 * pi / wavenumber(omega_a);
    const auto pole = static_cast<std::size_t>(std::llround(1.0 / dx));

    std::vector<SpectralTable> out(req.size());
    std::vector<std::string> keys(req.size());
    std::vector<std::size_t> count(req.size());
    std::vector<std::size_t> missing;
    TableBuildInfo stats;
    for (std::size_t i = 0; i < req.size(); ++i) {
        const PairSpec& p = req[i].pair;
        if (p.a.r <= fiber.radius || p.b.r <= fiber.radius) throw DomainError("emitter inside the fiber");
        out[i].dx = dx;
        out[i].generator = "fiber-radiation";
        out[i].r_tilde_over_lambda = separation(p) / lambda_a;
        count[i] = sample_count(req[i].x_max, dx);
        if (count[i] < pole + 3) throw InvalidArgument("table must extend past omega_a");
        keys[i] = series_key(fiber, p, omega_a, dx, count[i], quad);
        std::optional<std::vector<cplx>> hit;
        if (cache) hit = cache->load(keys[i]);
        if (hit && hit->size() == count[i]) {
            out[i].values = std::move(*hit);
            ++stats.cached_series;
        } else {
            missing.push_back(i);
        }
    }
    if (missing.empty()) {
        if (info) *info = stats;
        return out;
    }

    std::size_t n_max = 0;
    for (std::size_t i : missing) {
        n_max = std::max(n_max, count[i]);
        out[i].values.assign(count[i], 0.0);  // f(0) = 0 by oddness of Im G
    }
    // certified samples: the pole and four more spread over the range
    std::vector<std::size_t> certified = {pole};
    for (int j = 1; j <= 4; ++j) certified.push_back(std::max<std::size_t>(1, (n_max - 1) * j / 4));

    std::atomic<std::size_t> next{1};
    std::mutex mtx;
    std::exception_ptr failure;
    double worst = 0.0;
    auto worker = [&] {
        for (;;) {
            const std::size_t n = next.fetch_add(1);
            if (n >= n_max) return;
            {
                std::lock_guard<std::mutex> lk(mtx);
                if (failure) return;
            }
            try {
                const double omega = static_cast<double>(n) * dx * omega_a;
                std::vector<std::size_t> active;
                std::vector<PointPair> pairs;
                double r_max = 0.0, dz_max = 0.0;
                for (std::size_t i : missing) {
                    if (n >= count[i]) continue;
                    active.push_back(i);
                    const PairSpec& p = req[i].pair;
                    pairs.push_back({p.a, p.b});
                    r_max = std::max({r_max, p.a.r, p.b.r});
                    dz_max = std::max(dz_max, std::abs(p.a.z - p.b.z));
                }
                std::vector<Mat3c> g;
                double achieved = 0.0;
                if (std::find(certified.begin(), certified.end(), n) != certified.end()) {
                    RadiationResult r = im_g_radiation_certified(fiber, omega, pairs, quad);
                    g = std::move(r.values);
                    achieved = r.achieved_tol;
                } else {
                    g = im_g_radiation_fixed(refractive_index_clamped(fiber, omega), fiber.radius, omega, pairs,
                                             resolve_orders(quad, omega, r_max, dz_max), 0.1 * quad.rel_tol);
                }
                std::lock_guard<std::mutex> lk(mtx);
                worst = std::max(worst, achieved);
                for (std::size_t k = 0; k < active.size(); ++k) {
                    const PairSpec& p = req[active[k]].pair;
                    out[active[k]].values[n] = scale * sandwich(p.d_a, g[k], p.d_b);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(mtx);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(worker_threads(), n_max));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i : missing) {
        out[i].validate();
        if (cache) cache->store(keys[i], out[i].values);
        ++stats.computed_series;
    }
    stats.worst_certificate = worst;
    if (info) *info = stats;
    return out;
}

cplx v_from_table(const SpectralTable& t, const PvStrategy& s, const PairSpec& p, double omega_a) {
    const Mat3c gl = g0_longitudinal(p.a.cartesian(), p.b.cartesian(), omega_a).cast<cplx>();
    return pv_apply(t, s) / pi + 3.0 * pi / wavenumber(omega_a) * sandwich(p.d_a, gl, p.d_b);
}

cplx v_rd_pair(const FiberSpec& fiber, const PairSpec& p, double omega_a, const RadiationQuadratureSpec& quad,
               const PvStrategy& s, const SpectralCache* cache) {
    const double rt = separation(p) / wavelength_from_omega(omega_a);
    if (!(rt > 0.0)) throw DomainError("coincident emitters have no pair interaction");
    const double dx = default_grid_step(rt);
    const std::vector<SpectralTable> t =
        build_radiation_tables(fiber, {{p, s.x_max() + 2.0 * dx}}, omega_a, dx, quad, cache);
    return v_from_table(t.front(), s, p, omega_a);
}

cplx v0_numeric(const PairSpec& p, double omega_a, const PvStrategy& s) {
    const double rt = separation(p) / wavelength_from_omega(omega_a);
    if (!(rt > 0.0)) throw DomainError("coincident emitters have no pair interaction");
    const double dx = default_grid_step(rt);
    const SpectralTable t = vacuum_table(p, omega_a, dx, s.x_max() + 2.0 * dx);
    const Mat3c gl = g0_longitudinal(p.a.cartesian(), p.b.cartesian(), omega_a).cast<cplx>();
    return pv_apply(t, s) / pi + 3.0 * pi / wavenumber(omega_a) * sandwich(p.d_a, gl, p.d_b);
}

}  // namespace nfqed
