#include "thermoforge/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace thermoforge {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int smallest_factor(int n) {
    for (int f = 2; f * f <= n; ++f)
        if (n % f == 0) return f;
    return n;
}

// Recursive mixed-radix DIT. in has stride `stride`; out is contiguous length n.
// sign = -1 forward, +1 inverse (unscaled).
void fft_rec(int n, int stride, const cplx* in, cplx* out, int sign) {
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    const int r = smallest_factor(n);
    const int m = n / r;
    for (int j = 0; j < r; ++j)
        fft_rec(m, stride * r, in + static_cast<std::ptrdiff_t>(j) * stride, out + j * m, sign);

    // Generic radix-r combine: X[k2 + q*m] = sum_j sub_j[k2] * w^(j*(k2+q*m)).
    std::vector<cplx> sub(out, out + n);
    for (int k2 = 0; k2 < m; ++k2) {
        for (int q = 0; q < r; ++q) {
            const int k = k2 + q * m;
            cplx acc(0.0, 0.0);
            for (int j = 0; j < r; ++j) {
                const double ang = sign * kTwoPi * (static_cast<double>(j) * k) / n;
                acc += sub[static_cast<std::size_t>(j) * m + k2] * cplx(std::cos(ang), std::sin(ang));
            }
            out[k] = acc;
        }
    }
}

void transform_axis(std::vector<cplx>& field, int n, int count_outer, int stride_line,
                    int stride_outer_a, int count_a, int stride_outer_b, int sign) {
    std::vector<cplx> line(n), out(n);
    for (int a = 0; a < count_a; ++a)
        for (int b = 0; b < count_outer; ++b) {
            cplx* base = field.data() + static_cast<std::ptrdiff_t>(a) * stride_outer_a +
                         static_cast<std::ptrdiff_t>(b) * stride_outer_b;
            for (int t = 0; t < n; ++t) line[t] = base[static_cast<std::ptrdiff_t>(t) * stride_line];
            fft_rec(n, 1, line.data(), out.data(), sign);
            for (int t = 0; t < n; ++t) base[static_cast<std::ptrdiff_t>(t) * stride_line] = out[t];
        }
}

} // namespace

void dft3(std::vector<cplx>& field, const Grid3& dims, bool forward) {
    if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0)
        throw std::invalid_argument("dft3: axis lengths must be positive");
    if (field.size() != dims.count())
        throw std::invalid_argument("dft3: field size does not match dims");
    const int sign = forward ? -1 : +1;
    // x lines: contiguous, one per (y,z)
    transform_axis(field, dims.nx, dims.ny, 1, dims.nx * dims.ny, dims.nz, dims.nx, sign);
    // y lines: stride nx, one per (x,z)
    transform_axis(field, dims.ny, dims.nx, dims.nx, dims.nx * dims.ny, dims.nz, 1, sign);
    // z lines: stride nx*ny, one per (x,y)
    transform_axis(field, dims.nz, dims.nx * dims.ny, dims.nx * dims.ny, 0, 1, 1, sign);
    if (!forward) {
        const double inv = 1.0 / static_cast<double>(dims.count());
        for (auto& v : field) v *= inv;
    }
}

SpectralPlan::SpectralPlan(const Grid3& grid, const std::array<int, 3>& modes, int channels)
    : grid_(grid), m1_(modes[0]), m2_(modes[1]), m3_(modes[2]), ch_(channels) {
    if (grid.nx <= 0 || grid.ny <= 0 || grid.nz <= 0)
        throw std::invalid_argument("spectral plan: bad grid");
    if (m1_ < 1 || m2_ < 1 || m3_ < 1)
        throw std::invalid_argument("spectral plan: modes must be >= 1");
    // K and -K must not alias: need n >= 2m - 1 per axis.
    if (grid.nx < 2 * m1_ - 1 || grid.ny < 2 * m2_ - 1 || grid.nz < 2 * m3_ - 1)
        throw std::invalid_argument("spectral plan: grid too small for mode count");

    auto fill = [](std::vector<double>& c, std::vector<double>& s, int m, int n) {
        c.resize(static_cast<std::size_t>(m) * n);
        s.resize(static_cast<std::size_t>(m) * n);
        for (int k = 0; k < m; ++k)
            for (int t = 0; t < n; ++t) {
                const double ang = kTwoPi * (static_cast<double>(k) * t) / n;
                c[static_cast<std::size_t>(k) * n + t] = std::cos(ang);
                s[static_cast<std::size_t>(k) * n + t] = std::sin(ang);
            }
    };
    fill(cx_, sx_, m1_, grid.nx);
    fill(cy_, sy_, m2_, grid.ny);
    fill(cz_, sz_, m3_, grid.nz);
}

void SpectralPlan::init_work(SpectralWork& work) const {
    const std::size_t n = static_cast<std::size_t>(m3_) *
                          std::max(grid_.ny * grid_.nx, std::max(m2_ * grid_.nx, m2_ * grid_.ny)) * ch_;
    work.are.assign(n, 0.0);
    work.aim.assign(n, 0.0);
    work.bre.assign(n, 0.0);
    work.bim.assign(n, 0.0);
}

// All passes below keep the channel axis innermost so the accumulation loops
// vectorize; the transform axis is reduced with precomputed cos/sin rows.

void SpectralPlan::forward(const double* field, double* out_re, double* out_im,
                           SpectralWork& work) const {
    const int n1 = grid_.nx, n2 = grid_.ny, n3 = grid_.nz, ch = ch_;
    const std::size_t row = static_cast<std::size_t>(ch);

    // z-pass (real input): A[kz][y][x][c] = sum_z field[z][y][x][c] e^{-i th(kz,z)}
    double* are = work.are.data();
    double* aim = work.aim.data();
    const std::size_t plane_in = static_cast<std::size_t>(n2) * n1 * ch;
    const std::size_t plane_a = plane_in; // per kz
    for (int kz = 0; kz < m3_; ++kz) {
        const double* crow = cz_.data() + static_cast<std::size_t>(kz) * n3;
        const double* srow = sz_.data() + static_cast<std::size_t>(kz) * n3;
        double* ar = are + static_cast<std::size_t>(kz) * plane_a;
        double* ai = aim + static_cast<std::size_t>(kz) * plane_a;
        for (std::size_t i = 0; i < plane_a; ++i) { ar[i] = 0.0; ai[i] = 0.0; }
        for (int z = 0; z < n3; ++z) {
            const double c = crow[z], s = srow[z];
            const double* src = field + static_cast<std::size_t>(z) * plane_in;
            for (std::size_t i = 0; i < plane_in; ++i) {
                ar[i] += src[i] * c;
                ai[i] -= src[i] * s;
            }
        }
    }

    // y-pass: B[kz][ky][x][c] = sum_y A[kz][y][x][c] e^{-i th(ky,y)}
    double* bre = work.bre.data();
    double* bim = work.bim.data();
    const std::size_t xrow = static_cast<std::size_t>(n1) * ch;
    const std::size_t plane_b = static_cast<std::size_t>(m2_) * xrow;
    for (int kz = 0; kz < m3_; ++kz) {
        const double* ar = are + static_cast<std::size_t>(kz) * plane_a;
        const double* ai = aim + static_cast<std::size_t>(kz) * plane_a;
        double* br = bre + static_cast<std::size_t>(kz) * plane_b;
        double* bi = bim + static_cast<std::size_t>(kz) * plane_b;
        for (std::size_t i = 0; i < plane_b; ++i) { br[i] = 0.0; bi[i] = 0.0; }
        for (int ky = 0; ky < m2_; ++ky) {
            const double* crow = cy_.data() + static_cast<std::size_t>(ky) * n2;
            const double* srow = sy_.data() + static_cast<std::size_t>(ky) * n2;
            double* brow = br + static_cast<std::size_t>(ky) * xrow;
            double* birow = bi + static_cast<std::size_t>(ky) * xrow;
            for (int y = 0; y < n2; ++y) {
                const double c = crow[y], s = srow[y];
                const double* sr = ar + static_cast<std::size_t>(y) * xrow;
                const double* si = ai + static_cast<std::size_t>(y) * xrow;
                for (std::size_t i = 0; i < xrow; ++i) {
                    // (sr + i si)(c - i s)
                    brow[i] += sr[i] * c + si[i] * s;
                    birow[i] += si[i] * c - sr[i] * s;
                }
            }
        }
    }

    // x-pass: out[kz][ky][kx][c] = sum_x B[kz][ky][x][c] e^{-i th(kx,x)}
    for (int kz = 0; kz < m3_; ++kz)
        for (int ky = 0; ky < m2_; ++ky) {
            const double* br = bre + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            const double* bi = bim + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            for (int kx = 0; kx < m1_; ++kx) {
                const double* crow = cx_.data() + static_cast<std::size_t>(kx) * n1;
                const double* srow = sx_.data() + static_cast<std::size_t>(kx) * n1;
                double* orow = out_re + ((static_cast<std::size_t>(kz) * m2_ + ky) * m1_ + kx) * row;
                double* oirow = out_im + ((static_cast<std::size_t>(kz) * m2_ + ky) * m1_ + kx) * row;
                for (std::size_t c = 0; c < row; ++c) { orow[c] = 0.0; oirow[c] = 0.0; }
                for (int x = 0; x < n1; ++x) {
                    const double c = crow[x], s = srow[x];
                    const double* sr = br + static_cast<std::size_t>(x) * row;
                    const double* si = bi + static_cast<std::size_t>(x) * row;
                    for (std::size_t cc = 0; cc < row; ++cc) {
                        orow[cc] += sr[cc] * c + si[cc] * s;
                        oirow[cc] += si[cc] * c - sr[cc] * s;
                    }
                }
            }
        }
}

void SpectralPlan::inverse(const double* in_re, const double* in_im, double* field,
                           double scale, bool halve_dc, SpectralWork& work) const {
    const int n1 = grid_.nx, n2 = grid_.ny, n3 = grid_.nz, ch = ch_;
    const std::size_t row = static_cast<std::size_t>(ch);

    // x-pass: A[kz][ky][x][c] = sum_kx S[kz][ky][kx][c] e^{+i th(kx,x)},
    // with the DC triple optionally halved (folded in here).
    double* are = work.are.data();
    double* aim = work.aim.data();
    const std::size_t xrow = static_cast<std::size_t>(n1) * ch;
    const std::size_t plane_a = static_cast<std::size_t>(m2_) * xrow;
    for (int kz = 0; kz < m3_; ++kz)
        for (int ky = 0; ky < m2_; ++ky) {
            double* ar = are + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            double* ai = aim + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            for (std::size_t i = 0; i < xrow; ++i) { ar[i] = 0.0; ai[i] = 0.0; }
            for (int kx = 0; kx < m1_; ++kx) {
                const double* sr = in_re + ((static_cast<std::size_t>(kz) * m2_ + ky) * m1_ + kx) * row;
                const double* si = in_im + ((static_cast<std::size_t>(kz) * m2_ + ky) * m1_ + kx) * row;
                const double w = (halve_dc && kz == 0 && ky == 0 && kx == 0) ? 0.5 : 1.0;
                const double* crow = cx_.data() + static_cast<std::size_t>(kx) * n1;
                const double* srow = sx_.data() + static_cast<std::size_t>(kx) * n1;
                for (int x = 0; x < n1; ++x) {
                    const double c = crow[x] * w, s = srow[x] * w;
                    double* dr = ar + static_cast<std::size_t>(x) * row;
                    double* di = ai + static_cast<std::size_t>(x) * row;
                    for (std::size_t cc = 0; cc < row; ++cc) {
                        // (sr + i si)(c + i s)
                        dr[cc] += sr[cc] * c - si[cc] * s;
                        di[cc] += si[cc] * c + sr[cc] * s;
                    }
                }
            }
        }

    // y-pass: B[kz][y][x][c] = sum_ky A[kz][ky][x][c] e^{+i th(ky,y)}
    double* bre = work.bre.data();
    double* bim = work.bim.data();
    const std::size_t plane_b = static_cast<std::size_t>(n2) * xrow;
    for (int kz = 0; kz < m3_; ++kz) {
        double* br = bre + static_cast<std::size_t>(kz) * plane_b;
        double* bi = bim + static_cast<std::size_t>(kz) * plane_b;
        for (std::size_t i = 0; i < plane_b; ++i) { br[i] = 0.0; bi[i] = 0.0; }
        for (int ky = 0; ky < m2_; ++ky) {
            const double* ar = are + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            const double* ai = aim + (static_cast<std::size_t>(kz) * m2_ + ky) * xrow;
            const double* crow = cy_.data() + static_cast<std::size_t>(ky) * n2;
            const double* srow = sy_.data() + static_cast<std::size_t>(ky) * n2;
            for (int y = 0; y < n2; ++y) {
                const double c = crow[y], s = srow[y];
                double* dr = br + static_cast<std::size_t>(y) * xrow;
                double* di = bi + static_cast<std::size_t>(y) * xrow;
                for (std::size_t i = 0; i < xrow; ++i) {
                    dr[i] += ar[i] * c - ai[i] * s;
                    di[i] += ai[i] * c + ar[i] * s;
                }
            }
        }
    }

    // z-pass, real part only: field[z][y][x][c] = scale * Re(sum_kz B e^{+i th})
    const std::size_t plane_out = static_cast<std::size_t>(n2) * xrow;
    for (int z = 0; z < n3; ++z) {
        double* dst = field + static_cast<std::size_t>(z) * plane_out;
        for (std::size_t i = 0; i < plane_out; ++i) dst[i] = 0.0;
        for (int kz = 0; kz < m3_; ++kz) {
            const double c = cz_[static_cast<std::size_t>(kz) * n3 + z] * scale;
            const double s = sz_[static_cast<std::size_t>(kz) * n3 + z] * scale;
            const double* br = bre + static_cast<std::size_t>(kz) * plane_b;
            const double* bi = bim + static_cast<std::size_t>(kz) * plane_b;
            for (std::size_t i = 0; i < plane_out; ++i)
                dst[i] += br[i] * c - bi[i] * s;
        }
    }
}

void SpectralPlan::inverse_adjoint(const double* field, double* out_re, double* out_im,
                                   SpectralWork& work) const {
    forward(field, out_re, out_im, work);
    const double scale = 2.0 / static_cast<double>(grid_.count());
    const std::size_t total = static_cast<std::size_t>(mode_count()) * ch_;
    for (std::size_t i = 0; i < total; ++i) {
        out_re[i] *= scale;
        out_im[i] *= scale;
    }
    // DC triple gets the halved weight.
    for (int c = 0; c < ch_; ++c) {
        out_re[c] *= 0.5;
        out_im[c] *= 0.5;
    }
}

} // namespace thermoforge
