"""
Simulation scenario definitions

mc1..mc3: three equally sampled classes, case-control design.
cov1..cov3: two classes with a uniform covariate on [0,1].
"""
from youden_gibbs.class_distribution import (Beta_2_2, Chi2_1, Cov1_diseased, Cov1_healthy,
                                             Cov2_diseased, Cov2_healthy, Cov3_diseased,
                                             Cov3_healthy, Gamma_2_1, Gamma_3_1, Gamma_5_2,
                                             Mix_low, Mix_mid, Normal_5_2, T_2)
from youden_gibbs.simulation import CASE_CONTROL, ScenarioSpec

# Gamma shape/scale
MC1 = ScenarioSpec(
    id="mc1",
    n_per_group=50,
    classes=(Gamma_2_1, Gamma_3_1, Gamma_5_2),
    design=CASE_CONTROL,
    informative_sd=0.5)  # prior sd of the informative Gibbs fit

# bimodal lower classes
MC2 = ScenarioSpec(
    id="mc2",
    n_per_group=50,
    classes=(Mix_low, Mix_mid, Normal_5_2),
    design=CASE_CONTROL,
    informative_sd=0.5)

# heavy tails and bounded support mixed
MC3 = ScenarioSpec(
    id="mc3",
    n_per_group=50,
    classes=(T_2, Beta_2_2, Chi2_1),
    design=CASE_CONTROL,
    informative_sd=0.25)

COV1 = ScenarioSpec(
    id="cov1",
    n_per_group=100,
    classes=(Cov1_healthy, Cov1_diseased),
    design=CASE_CONTROL)

COV2 = ScenarioSpec(
    id="cov2",
    n_per_group=200,
    classes=(Cov2_healthy, Cov2_diseased),
    design=CASE_CONTROL)

COV3 = ScenarioSpec(
    id="cov3",
    n_per_group=200,
    classes=(Cov3_healthy, Cov3_diseased),
    design=CASE_CONTROL)

SCENARIOS = {s.id: s for s in (MC1, MC2, MC3, COV1, COV2, COV3)}
