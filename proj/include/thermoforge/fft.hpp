#pragma once

#include <array>
#include <complex>
#include <vector>

#include "thermoforge/grid.hpp"

namespace thermoforge {

using cplx = std::complex<double>;

// 3D discrete Fourier transform for arbitrary axis lengths (mixed-radix
// Cooley-Tukey; prime lengths fall back to a direct stage). Forward is
// unnormalized, inverse carries the 1/N factor, so inverse(forward(x)) == x.
// Data is x-fastest per Grid3.
void dft3(std::vector<cplx>& field, const Grid3& dims, bool forward);

// Caller-owned scratch for SpectralPlan; one per thread.
struct SpectralWork {
    std::vector<double> are, aim, bre, bim;
};

// Truncated-spectrum transforms used by the spectral layers. The retained
// mode set is K ∪ -K where K is the octant of non-negative frequency triples
// {0..m-1}^3; -K carries the conjugate mirror of K, which keeps outputs of
// Hermitian per-mode products exactly real. Only the K octant is ever stored:
// shape [m3][m2][m1][channels], planar re/im, channel-fastest.
class SpectralPlan {
public:
    SpectralPlan(const Grid3& grid, const std::array<int, 3>& modes, int channels);

    const Grid3& grid() const { return grid_; }
    int mode_count() const { return m1_ * m2_ * m3_; }
    int channels() const { return ch_; }
    void init_work(SpectralWork& work) const;

    // Unnormalized forward DFT of a real field restricted to the K octant.
    // field: [n3][n2][n1][ch] real; out_re/out_im: [m3][m2][m1][ch].
    void forward(const double* field, double* out_re, double* out_im,
                 SpectralWork& work) const;

    // Real-part inverse: field(x) = scale * Re( sum_{k in K} w_k S_k e^{+ikx} )
    // with w_dc = 1/2 when halve_dc is set, else 1. The spectral layer uses
    // scale = 2/N, halve_dc = true; the same kernel with scale = 1,
    // halve_dc = false is the adjoint of forward().
    void inverse(const double* in_re, const double* in_im, double* field,
                 double scale, bool halve_dc, SpectralWork& work) const;

    // Adjoint of inverse(scale=2/N, halve_dc=true): forward transform of the
    // incoming gradient with the matching weights folded in.
    void inverse_adjoint(const double* field, double* out_re, double* out_im,
                         SpectralWork& work) const;

private:
    Grid3 grid_;
    int m1_, m2_, m3_, ch_;
    // cos/sin tables per axis, [mode][position].
    std::vector<double> cx_, sx_, cy_, sy_, cz_, sz_;
};

} // namespace thermoforge
