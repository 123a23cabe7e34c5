#pragma once

#include <string>
#include <vector>

namespace copo::check {

struct FixtureReport {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

// Each fixture verifies one analytic-gradient path against an independent
// numeric oracle and stays small enough to run in well under a minute.
FixtureReport check_mlp();           // backward + forward-mode vs central differences
FixtureReport check_ppo_loss();      // policy/value losses vs central differences,
                                     // plus the exact clipped-branch zero-gradient law
FixtureReport check_gae();           // recursion vs O(T^2) direct sums
FixtureReport check_neighborhood();  // spatial hash vs brute-force neighbor means
FixtureReport check_lcf_bandit();    // coordination-factor gradient vs a bilevel
                                     // finite-difference oracle; sign on the
                                     // cooperation fixture

// name in {mlp, ppo_loss, gae, neighborhood, lcf_bandit, all}; throws
// std::invalid_argument on anything else.
std::vector<FixtureReport> run_fixtures(const std::string& name);

}  // namespace copo::check
