#pragma once

#include <vector>

#include "nfnoma/geometry.hpp"

namespace nfnoma {

// Effective beamformers of one group. Steering uses the same vector three
// times; splitting carries the two sub-beams and their sum, which is the
// vector every interference term sees.
struct GroupBeams {
    VecC near_beam, far_beam, combined;

    static GroupBeams uniform(VecC b) {
        GroupBeams g;
        g.near_beam = b;
        g.far_beam = b;
        g.combined = std::move(b);
        return g;
    }
    static GroupBeams split(VecC near, VecC far) {
        GroupBeams g;
        g.combined = near + far;
        g.near_beam = std::move(near);
        g.far_beam = std::move(far);
        return g;
    }
};

struct UserChannels {
    ChannelVector nu, fu;
};

struct LinkEntry {
    double desired = 0.0; // received power of the decoded signal
    double intra = 0.0;   // intra-group interference power
    double inter = 0.0;   // inter-group interference power
    double noise = 0.0;
    double sinr = 0.0;
    double rate = 0.0;    // log2(1 + sinr)
};

struct GroupBudget {
    LinkEntry nu, fu;
    double gamma_n_to_f = 0.0; // SINR of the NU decoding the FU signal
    bool sic_ok = true;        // gamma_n_to_f >= fu.sinr
};

// Full SINR/rate evaluation under inter-group interference.
std::vector<GroupBudget> sinr_table(const std::vector<UserChannels>& channels,
                                    const std::vector<GroupBeams>& beams, const std::vector<double>& p1,
                                    const std::vector<double>& p2, double noise);

std::vector<bool> sic_feasible(const std::vector<GroupBudget>& budgets);

struct PairRates {
    double nu = 0.0, fu = 0.0;
};

// Orthogonal baselines; rate laws as quoted for the comparison schemes
// (two equal bands with per-band noise sigma^2/2, two equal time slots with
// the full group power).
std::vector<PairRates> fdma_rates(const std::vector<UserChannels>& channels, const std::vector<GroupBeams>& beams,
                                  const std::vector<double>& p_nu, const std::vector<double>& p_fu, double noise);
std::vector<PairRates> tdma_rates(const std::vector<UserChannels>& channels, const std::vector<GroupBeams>& beams,
                                  const std::vector<double>& p_group, double noise);

// Fully digital zero-forcing beamformers from the NU channels alone; columns
// have unit norm and (h_j^N)^H w_i = 0 for j != i. Throws on rank deficiency.
MatC zf_beamformers(const std::vector<ChannelVector>& nu_channels);

}  // namespace nfnoma
