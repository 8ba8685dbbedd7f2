// Simulate one random chain, fit ECRM, ERM and sliding-window predictors to
// it, and score each with the exact conditional risk at the final history.

#include <cstdio>

#include "crm/crm.hpp"

int main() {
    const crm::HiddenMarkovSpec spec = crm::random_chain(7);
    const crm::SampleSequence seq = crm::simulate(spec, 2000, 7);
    const std::size_t d = 4;

    crm::TrainConfig cfg;
    cfg.d = d;
    cfg.kernel = crm::StratifiedSetSpec{0.08};
    const crm::Hypothesis ecrm = crm::ecrm_fit(seq, seq.final_history(d), cfg);
    const crm::Hypothesis erm = crm::erm_fit(seq);
    const crm::Hypothesis sw = crm::sliding_window_fit(seq, d);

    const crm::StatePosterior next = crm::forward_posterior(spec, seq);
    std::printf("next-state posterior:");
    for (double p : next.probs) std::printf(" %.3f", p);
    std::printf("\n");
    for (const auto& [name, h] : {std::pair{"ecrm", ecrm}, std::pair{"erm", erm}, std::pair{"sliding-window", sw}})
        std::printf("%-15s conditional risk %.4f\n", name, crm::conditional_risk_oracle(spec, next, h));

    // the kernel estimate of the ECRM predictor's conditional risk, from the data alone
    std::printf("estimated       conditional risk %.4f\n",
                crm::conditional_risk_estimate(seq, d, cfg.kernel, seq.final_history(d), ecrm));
    return 0;
}
