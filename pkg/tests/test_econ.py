import numpy as np
import pandas as pd
import pytest

from retailflow.econ import (
    INTERCEPT, FamaMacBeth, Formula, economic_magnitude, fama_macbeth,
    hansen_hodrick_var, interquartile_range, newey_west_var, ols, ols_hac,
    tstat
)
from retailflow.exceptions import (
    DegenerateError, EmptySeriesError, HansenHodrickFallbackWarning,
    InsufficientPeriodsError, SingularMatrixError, SkippedPeriodWarning
)
from retailflow.synth import PanelScenario, gen_panel
from retailflow.synth.oracles import (
    hansen_hodrick_oracle, newey_west_oracle, ols_oracle
)


PLANTED = Formula('ret', ('mroibvol_lag1', 'ret_lag1', 'lmto_lag1'))


def test_ols_matches_exact_normal_equations(random_state):
    X = random_state.normal(size=(60, 3))
    y = X @ [.5, -1., 2.] + random_state.normal(size=60)
    fit = ols(X, y)
    np.testing.assert_allclose(fit.params.values, ols_oracle(X, y),
                               rtol=1e-10)
    assert fit.params.index.tolist() == [INTERCEPT, 'x0', 'x1', 'x2']
    assert (fit.n, fit.k) == (60, 3)
    assert fit.adj_r2 == pytest.approx(
        1 - (1 - fit.r2) * 59 / 56)


def test_ols_exact_line():
    x = pd.DataFrame({'x': [0., 1., 2., 3.]})
    fit = ols(x, 1 + 2 * x['x'])
    assert fit.params[INTERCEPT] == pytest.approx(1.)
    assert fit.params['x'] == pytest.approx(2.)
    assert fit.r2 == pytest.approx(1.)


def test_ols_names_dependent_column(random_state):
    a = random_state.normal(size=20)
    X = pd.DataFrame({'a': a, 'b': 2 * a, 'c': random_state.normal(size=20)})
    with pytest.raises(SingularMatrixError) as info:
        ols(X, random_state.normal(size=20))
    assert info.value.column in ('a', 'b')
    assert info.value.exit_code == 4

    with pytest.raises(DegenerateError):
        ols(X[['a']].iloc[:2], [1., 2.])


def test_variance_of_the_mean_known_values():
    assert newey_west_var([1, 2, 3, 4], 1) == pytest.approx(.390625)
    variance, fell_back = hansen_hodrick_var([1, 2, 3, 4], 1)
    assert variance == pytest.approx(.46875)
    assert not fell_back


@pytest.mark.parametrize('lags', [0, 1, 3, 6])
def test_variance_of_the_mean_matches_oracles(lags, random_state):
    series = random_state.normal(size=40)
    assert newey_west_var(series, lags) == \
        pytest.approx(newey_west_oracle(series, lags), rel=1e-10)
    variance, _ = hansen_hodrick_var(series + 1., 0)
    assert variance == pytest.approx(hansen_hodrick_oracle(series, 0))


def test_hansen_hodrick_falls_back_to_newey_west():
    with pytest.warns(HansenHodrickFallbackWarning):
        variance, fell_back = hansen_hodrick_var([1, -1, 1, -1], 1)
    assert fell_back
    assert variance == pytest.approx(.0625)


def test_variance_needs_enough_periods():
    with pytest.raises(InsufficientPeriodsError):
        newey_west_var([1., 2.], 1)
    with pytest.raises(EmptySeriesError):
        newey_west_var([], 0)


def test_tstat_flags_zero_standard_errors():
    assert tstat(1., .5) == (2., False)
    assert tstat(-1., 0.) == (float('-inf'), True)
    t, flagged = tstat(0., 0.)
    assert np.isnan(t) and flagged


def test_ols_hac_reports_standard_errors(random_state):
    x = random_state.normal(size=100)
    y = .3 * x + random_state.normal(size=100)
    fit = ols_hac(x, y, lags=4)
    assert fit.se.index.tolist() == [INTERCEPT, 'x0']
    assert (fit.se > 0).all()
    assert fit.tstat['x0'] == pytest.approx(
        fit.fit.params['x0'] / fit.se['x0'])
    assert not fit.fell_back


def test_fama_macbeth_recovers_planted_slopes(planted_panel):
    scenario, synthetic = planted_panel
    with pytest.warns(SkippedPeriodWarning):
        result = fama_macbeth(synthetic.panel, PLANTED, lags=6)
    assert result.mean['mroibvol_lag1'] == pytest.approx(.5, abs=1e-8)
    assert result.mean['ret_lag1'] == pytest.approx(-.1, abs=1e-8)
    assert result.mean['lmto_lag1'] == pytest.approx(.002, abs=1e-8)
    # The first week has no lagged values.
    assert result.n_skipped == 1
    assert result.n_periods == scenario.n_weeks - 1

    frame = result.to_frame()
    assert frame['variable'].tolist()[-1] == 'Adj. R2'
    assert frame['n_periods'].unique().tolist() == [scenario.n_weeks - 1]


def test_fama_macbeth_is_independent_of_jobs(planted_panel):
    _, synthetic = planted_panel
    panel = synthetic.panel[synthetic.panel['week'] >= 1]
    serial = FamaMacBeth(PLANTED, lags=3).fit(panel).result_
    parallel = FamaMacBeth(PLANTED, lags=3, n_jobs=2).fit(panel).result_
    pd.testing.assert_frame_equal(serial.coefficients,
                                  parallel.coefficients)


def test_fama_macbeth_needs_enough_periods(planted_panel):
    _, synthetic = planted_panel
    panel = synthetic.panel[synthetic.panel['week'].between(1, 4)]
    with pytest.raises(InsufficientPeriodsError):
        FamaMacBeth(PLANTED, lags=6).fit(panel)


def test_economic_magnitude():
    weekly, annual = economic_magnitude(0.000934, 1.1950)
    assert weekly == pytest.approx(.1116, abs=1e-4)
    assert annual == pytest.approx(5.8039, abs=1e-4)


def test_interquartile_range():
    assert interquartile_range([4, 1, np.nan, 3, 2]) == 1.5
    with pytest.raises(EmptySeriesError):
        interquartile_range([np.nan])


def _noisy_panel(seed, coefficients, n_symbols, n_weeks):
    synthetic = gen_panel(PanelScenario(
        seed=seed, n_symbols=n_symbols, n_weeks=n_weeks,
        coefficients=coefficients, loading_dispersion=0.))
    return synthetic.panel[synthetic.panel['week'] >= 1]


@pytest.mark.slow
def test_fama_macbeth_covers_planted_coefficients():
    planted = {'mroibvol': .01, 'ret': -.05, 'lmto': .002}
    covered = []
    for seed in range(20):
        result = fama_macbeth(_noisy_panel(seed, planted, 100, 60), PLANTED,
                              lags=5)
        for name in ('mroibvol', 'ret', 'lmto'):
            column = name + '_lag1'
            covered.append(abs(result.mean[column] - planted[name])
                           <= 3 * result.se[column])
    assert np.mean(covered) >= .95


@pytest.mark.slow
def test_fama_macbeth_size_without_signal():
    rejected = []
    for seed in range(200):
        result = fama_macbeth(_noisy_panel(seed, {}, 50, 120), PLANTED,
                              lags=5)
        rejected += [abs(result.tstat[c]) > 1.96 for c in PLANTED.regressors]
    assert .02 <= np.mean(rejected) <= .09
