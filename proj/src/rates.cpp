#include "nfnoma/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace nfnoma {

namespace {

double rx_power(const ChannelVector& ch, const VecC& beam) { return std::norm(ch.gains.dot(beam)); }

double rate_of(double sinr) { return std::log2(1.0 + sinr); }

}  // namespace

std::vector<GroupBudget> sinr_table(const std::vector<UserChannels>& channels,
                                    const std::vector<GroupBeams>& beams, const std::vector<double>& p1,
                                    const std::vector<double>& p2, double noise) {
    const int k = static_cast<int>(channels.size());
    if (static_cast<int>(beams.size()) != k || static_cast<int>(p1.size()) != k || static_cast<int>(p2.size()) != k)
        throw std::invalid_argument("sinr_table: inconsistent dimensions");
    for (int i = 0; i < k; ++i)
        if (p1[i] < 0.0 || p2[i] < 0.0) throw std::invalid_argument("sinr_table: powers must be non-negative");

    std::vector<GroupBudget> out(k);
    for (int i = 0; i < k; ++i) {
        double inter_n = 0.0, inter_f = 0.0;
        for (int t = 0; t < k; ++t) {
            if (t == i) continue;
            inter_n += (p1[t] + p2[t]) * rx_power(channels[i].nu, beams[t].combined);
            inter_f += (p1[t] + p2[t]) * rx_power(channels[i].fu, beams[t].combined);
        }

        GroupBudget& b = out[i];
        // NU decodes its own signal after removing the FU signal via SIC.
        b.nu.desired = p1[i] * rx_power(channels[i].nu, beams[i].near_beam);
        b.nu.intra = 0.0;
        b.nu.inter = inter_n;
        b.nu.noise = noise;
        b.nu.sinr = b.nu.desired / (inter_n + noise);
        b.nu.rate = rate_of(b.nu.sinr);

        // FU treats the NU signal as intra-group interference.
        b.fu.desired = p2[i] * rx_power(channels[i].fu, beams[i].far_beam);
        b.fu.intra = p1[i] * rx_power(channels[i].fu, beams[i].combined);
        b.fu.inter = inter_f;
        b.fu.noise = noise;
        b.fu.sinr = b.fu.desired / (b.fu.intra + inter_f + noise);
        b.fu.rate = rate_of(b.fu.sinr);

        // NU decoding the FU signal (SIC pre-stage).
        const double des_nf = p2[i] * rx_power(channels[i].nu, beams[i].far_beam);
        const double intra_nf = p1[i] * rx_power(channels[i].nu, beams[i].combined);
        b.gamma_n_to_f = des_nf / (intra_nf + inter_n + noise);
        b.sic_ok = b.gamma_n_to_f >= b.fu.sinr;
    }
    return out;
}

std::vector<bool> sic_feasible(const std::vector<GroupBudget>& budgets) {
    std::vector<bool> out(budgets.size());
    for (size_t i = 0; i < budgets.size(); ++i) out[i] = budgets[i].sic_ok;
    return out;
}

std::vector<PairRates> fdma_rates(const std::vector<UserChannels>& channels, const std::vector<GroupBeams>& beams,
                                  const std::vector<double>& p_nu, const std::vector<double>& p_fu, double noise) {
    const int k = static_cast<int>(channels.size());
    std::vector<PairRates> out(k);
    for (int i = 0; i < k; ++i) {
        out[i].nu = 0.5 * rate_of(p_nu[i] * rx_power(channels[i].nu, beams[i].near_beam) / (noise / 2.0));
        out[i].fu = 0.5 * rate_of(p_fu[i] * rx_power(channels[i].fu, beams[i].far_beam) / (noise / 2.0));
    }
    return out;
}

std::vector<PairRates> tdma_rates(const std::vector<UserChannels>& channels, const std::vector<GroupBeams>& beams,
                                  const std::vector<double>& p_group, double noise) {
    const int k = static_cast<int>(channels.size());
    std::vector<PairRates> out(k);
    for (int i = 0; i < k; ++i) {
        out[i].nu = 0.5 * rate_of(p_group[i] * rx_power(channels[i].nu, beams[i].near_beam) / noise);
        out[i].fu = 0.5 * rate_of(p_group[i] * rx_power(channels[i].fu, beams[i].far_beam) / noise);
    }
    return out;
}

MatC zf_beamformers(const std::vector<ChannelVector>& nu_channels) {
    const int k = static_cast<int>(nu_channels.size());
    if (k == 0) throw std::invalid_argument("zf_beamformers: empty channel set");
    const int mt = static_cast<int>(nu_channels[0].gains.size());
    MatC h(k, mt);
    for (int i = 0; i < k; ++i) h.row(i) = nu_channels[i].gains.adjoint();

    const MatC gram = h * h.adjoint();
    Eigen::FullPivLU<MatC> lu(gram);
    lu.setThreshold(1e-12);
    if (lu.rank() < k) throw std::invalid_argument("zf_beamformers: NU channels are rank deficient");

    MatC w = h.adjoint() * lu.inverse();
    for (int i = 0; i < k; ++i) {
        const double n = w.col(i).norm();
        if (n <= 0.0) throw std::invalid_argument("zf_beamformers: degenerate pseudo-inverse column");
        w.col(i) /= n;
    }
    return w;
}

}  // namespace nfnoma
