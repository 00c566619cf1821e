import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emfsim.dosimetry import (
    ExposureLimits,
    ExposureReport,
    TissueModel,
    compliance,
    downlink_exposure,
    fresnel_transmittance,
    load_tissue_table,
    penetration_depth,
    power_penetration_depth,
    sar_per_unit_pd,
    surface_sar,
    transmittance,
    uplink_exposure,
)
from emfsim.radio import AntennaPattern, RadioParams

import oracles
from conftest import make_topology

RADIO_28 = RadioParams(28e9, 400e6, 0.2, 1e-7, 7.0, 2.0, 1e-10)

# frozen from the real-arithmetic plane-wave oracle
DELTA_28 = 4.585378939888873e-4
DELTA_2 = 0.013139745798410991
T_28 = 0.535929458655075
T_2 = 0.46677826367107933
SAR_10_W_M2 = 10.62526358593928


def test_bundled_table_rows(skin):
    assert [r[0] for r in skin.rows] == [1.9e9, 2.0e9, 28e9, 60e9]
    assert skin.permittivity(28e9) == complex(16.5, -16.6)
    assert skin.permittivity(2e9) == complex(38.6, -11.4)
    assert skin.density_kg_m3 == 1100.0


def test_penetration_depth_examples(skin):
    assert penetration_depth(skin, 28e9) == pytest.approx(DELTA_28, rel=1e-12)
    assert penetration_depth(skin, 2e9) == pytest.approx(DELTA_2, rel=1e-12)
    assert abs(penetration_depth(skin, 28e9) - 4.59e-4) < 0.01e-4
    assert abs(penetration_depth(skin, 2e9) - 1.31e-2) < 0.01e-2


def test_frozen_values_match_oracle():
    assert oracles.penetration_depth(16.5, 16.6, 28e9) == pytest.approx(DELTA_28, rel=1e-14)
    assert oracles.transmittance(16.5, 16.6) == pytest.approx(T_28, rel=1e-14)
    assert oracles.surface_sar(10.0, 16.5, 16.6, 28e9, 1100.0) == pytest.approx(SAR_10_W_M2, rel=1e-14)


def test_lossless_medium():
    with pytest.raises(ValueError, match="lossless medium"):
        power_penetration_depth(complex(4.0, 0.0), 1e9)
    lossless = TissueModel(np.array([1e9, 2e9]), np.array([4.0, 4.0]), np.array([0.0, 0.0]))
    with pytest.raises(ValueError, match="lossless medium"):
        penetration_depth(lossless, 1.5e9)


def test_out_of_table(skin):
    with pytest.raises(ValueError, match="frequency outside tissue table"):
        penetration_depth(skin, 100e9)
    with pytest.raises(ValueError, match="frequency outside tissue table"):
        transmittance(skin, 1e9)


def test_transmittance_examples(skin):
    assert fresnel_transmittance(complex(1.0, 0.0)) == 1.0
    assert transmittance(skin, 28e9) == pytest.approx(T_28, rel=1e-12)
    assert transmittance(skin, 2e9) == pytest.approx(T_2, rel=1e-12)
    assert abs(transmittance(skin, 28e9) - 0.536) < 5e-4


def test_surface_sar_examples(skin):
    assert surface_sar(0.0, skin, 28e9) == 0.0
    assert surface_sar(10.0, skin, 28e9) == pytest.approx(SAR_10_W_M2, rel=1e-12)
    assert abs(surface_sar(10.0, skin, 28e9) - 10.6) < 0.05


def test_surface_sar_rejects_negative(skin):
    with pytest.raises(ValueError):
        surface_sar(-1.0, skin, 28e9)


def test_interpolation_log_frequency(skin):
    f = math.sqrt(2e9 * 28e9)  # geometric midpoint
    eps = skin.permittivity(f)
    assert eps.real == pytest.approx((38.6 + 16.5) / 2)
    assert eps.imag == pytest.approx(-(11.4 + 16.6) / 2)


def test_depth_decreases_with_frequency(skin):
    depths = [penetration_depth(skin, f) for f, _, _ in skin.rows]
    assert all(a > b for a, b in zip(depths, depths[1:]))


def test_load_custom_table(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("# comment\nfrequency_hz,eps_real,eps_imag\n3e9,40,12\n1e9,41,10\n")
    t = load_tissue_table(path, density_kg_m3=1000.0)
    assert t.rows == [(1e9, 41.0, 10.0), (3e9, 40.0, 12.0)]
    assert t.density_kg_m3 == 1000.0


def test_bad_table_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("f,a,b\n1,2,3\n4,5,6\n")
    with pytest.raises(ValueError, match="header"):
        load_tissue_table(path)


def test_single_bs_downlink_example(flat_tissue, limits):
    topo = make_topology([[0, 0]], [[100, 0]])
    beam = AntennaPattern.sectored(math.pi / 6, 0.1, boresight=0.0)
    rep = downlink_exposure(topo, [beam], [1.0], RADIO_28, 0, flat_tissue, limits)
    assert rep.incident_pd_w_m2 == pytest.approx(8.673944398508298e-05, rel=1e-12)
    assert abs(rep.incident_pd_w_m2 - 8.67e-5) < 0.01e-5
    assert rep.per_source == (("bs0", rep.incident_pd_w_m2),)
    assert rep.sar_w_kg == pytest.approx(oracles.surface_sar(rep.incident_pd_w_m2, 16.5, 16.6, 28e9, 1100.0))


def test_downlink_zero_power(flat_tissue, limits):
    topo = make_topology([[0, 0], [50, 50]], [[100, 0]])
    beams = [AntennaPattern.sectored(0.5)] * 2
    rep = downlink_exposure(topo, beams, [0.0, 0.0], RADIO_28, 0, flat_tissue, limits)
    assert rep.incident_pd_w_m2 == 0.0 and rep.sar_w_kg == 0.0
    assert rep.compliant is True


def test_downlink_colocated_bs_doubles(flat_tissue, limits):
    beam = AntennaPattern.sectored(math.pi / 6, 0.1)
    one = downlink_exposure(make_topology([[0, 0]], [[100, 0]]), [beam], [1.0], RADIO_28, 0, flat_tissue, limits)
    two = downlink_exposure(make_topology([[0, 0], [0, 0]], [[100, 0]]), [beam, beam], [1.0, 1.0], RADIO_28, 0,
                            flat_tissue, limits)
    assert two.incident_pd_w_m2 == 2 * one.incident_pd_w_m2


def test_downlink_needs_one_beam_per_bs(flat_tissue, limits):
    topo = make_topology([[0, 0], [10, 10]], [[100, 0]])
    with pytest.raises(ValueError):
        downlink_exposure(topo, [AntennaPattern.isotropic()], [1.0, 1.0], RADIO_28, 0, flat_tissue, limits)


def test_uplink_examples(flat_tissue, limits):
    pat = AntennaPattern.sectored(math.pi / 6, 0.1, boresight=0.0)
    side = uplink_exposure(0.2, pat, math.pi, 0.05, flat_tissue, 28e9, limits)
    assert side.incident_pd_w_m2 == pytest.approx(0.6366197723675813, rel=1e-12)
    assert side.sar_w_kg == pytest.approx(0.6764252885426215, rel=1e-12)
    assert abs(side.incident_pd_w_m2 - 0.637) < 5e-4
    assert abs(side.sar_w_kg - 0.676) < 5e-4
    main = uplink_exposure(0.2, pat, 0.0, 0.05, flat_tissue, 28e9, limits)
    assert main.incident_pd_w_m2 / side.incident_pd_w_m2 == pytest.approx(109.0)


def test_uplink_rejects_bad_distance(flat_tissue, limits):
    with pytest.raises(ValueError):
        uplink_exposure(0.2, AntennaPattern.isotropic(), 0.0, 0.0, flat_tissue, 28e9, limits)


def test_compliance_examples():
    lim = ExposureLimits(pd_limit_w_m2=10.0, sar_limit_w_kg=1.6)
    assert compliance(ExposureReport(0.0, 0.8, ()), lim).sar_limit_fraction == 0.5
    at_limit = compliance(ExposureReport(10.0, 0.0, ()), lim)
    assert at_limit.pd_limit_fraction == 1.0 and at_limit.compliant
    over = compliance(ExposureReport(0.0, 3.2, ()), lim)
    assert over.sar_limit_fraction == 2.0 and not over.compliant


def test_limits_validation():
    with pytest.raises(ValueError):
        ExposureLimits(sar_limit_w_kg=1.0, sar_trigger_w_kg=2.0)
    with pytest.raises(ValueError):
        ExposureLimits(pd_limit_w_m2=0.0)


@given(st.floats(1.0, 80.0), st.floats(0.01, 80.0))
def test_transmittance_in_unit_interval(er, ei):
    t = fresnel_transmittance(complex(er, -ei))
    assert 0 < t <= 1
    assert t == pytest.approx(oracles.transmittance(er, ei), rel=1e-10)


@given(st.floats(1.0, 80.0), st.floats(0.01, 80.0), st.floats(1e8, 1e11))
def test_depth_matches_oracle(er, ei, f):
    assert power_penetration_depth(complex(er, -ei), f) == pytest.approx(oracles.penetration_depth(er, ei, f),
                                                                         rel=1e-9)


@given(st.floats(0.0, 1e3), st.floats(1e-3, 1e3))
def test_sar_linear_in_pd(pd, k):
    t = TissueModel(np.array([1e9, 1e11]), np.array([16.5, 16.5]), np.array([16.6, 16.6]))
    base = sar_per_unit_pd(t, 28e9)
    assert surface_sar(pd * k, t, 28e9) == pytest.approx(pd * k * base, rel=1e-12)
