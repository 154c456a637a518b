"""Hardware profiles and the time-based performance model."""

import numpy as np
import pytest

from hosfem.axlocal import Equation, FactorSource, KernelSpec
from hosfem.roofline import (
    HardwareProfile,
    KernelModel,
    load_profile,
    machine_balance,
    mbp_crossing,
    measured_performance,
    operational_intensity,
    preset_names,
    resolve_profile,
    roofline_bounds,
)


def test_presets_ship_with_the_package():
    names = preset_names()
    assert "a100" in names and "k100" in names
    a100 = resolve_profile("a100")
    assert a100.peak_general == 9.7e12
    assert a100.peak_matrix == 19.5e12
    assert a100.bandwidth_measured == 1.360e12
    assert a100.bandwidth_theoretical == 1.555e12
    k100 = resolve_profile("k100")
    assert k100.peak_matrix is None
    assert k100.peak_general == 24.5e12


def test_profile_file_round_trip(tmp_path):
    path = tmp_path / "toy.txt"
    path.write_text(
        "# toy device\nname toy\npeak_general 1.0e12\n"
        "bandwidth_measured 0.5e12\nbandwidth_theoretical 0.6e12\n"
    )
    hw = load_profile(path)
    assert hw.name == "toy"
    assert hw.peak("general") == 1.0e12
    with pytest.raises(ValueError):
        hw.peak("matrix")  # not declared for this device
    hw2 = resolve_profile(str(path))
    assert hw2 == hw


def test_profile_validation_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("name x\npeak_general 1e12\nbandwidth_measured 2e12\nbandwidth_theoretical 1e12\n")
    with pytest.raises(ValueError):
        load_profile(bad)  # measured exceeds theoretical
    bad.write_text("name x\nbandwidth_measured 1e12\nbandwidth_theoretical 2e12\n")
    with pytest.raises(ValueError):
        load_profile(bad)  # missing peak
    with pytest.raises(ValueError):
        HardwareProfile("x", -1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        resolve_profile("no-such-device")


def test_machine_balance_reference_values():
    a100 = resolve_profile("a100")
    np.testing.assert_allclose(machine_balance(a100), 9.7e12 / 1.360e12, rtol=0)
    np.testing.assert_allclose(machine_balance(a100), 7.1324, rtol=1e-4)
    k100 = resolve_profile("k100")
    np.testing.assert_allclose(machine_balance(k100), 47.115, rtol=1e-4)
    np.testing.assert_allclose(
        machine_balance(a100, which_peak="matrix", bandwidth="theoretical"),
        19.5e12 / 1.555e12,
        rtol=0,
    )


def test_kernel_model_from_spec():
    spec = KernelSpec(Equation.HELMHOLTZ, 1, FactorSource.TRILINEAR_RECOMPUTE, 7)
    model = KernelModel.from_spec(spec)
    assert model.f_ax == 59392
    assert model.f_geo == 44416
    assert model.matrix_unit_flops == 0
    tc = KernelModel.from_spec(spec, tensor_core=True)
    assert tc.m_bytes == 16576  # the differentiation matrix stays on chip
    assert tc.matrix_unit_flops == 8 * 8**4
    kept = KernelModel.from_spec(spec, tensor_core=True, include_dmat_traffic=True)
    assert kept.m_bytes == 16576 + 8 * 64


def test_worked_example_reference_numbers():
    # Helmholtz, one column, N=7, trilinear recompute, matrix units on
    spec = KernelSpec(Equation.HELMHOLTZ, 1, FactorSource.TRILINEAR_RECOMPUTE, 7)
    model = KernelModel.from_spec(spec, tensor_core=True)
    bounds = roofline_bounds(model, resolve_profile("a100"))
    np.testing.assert_allclose(bounds.t_mem, 1.21882e-8, rtol=1e-4)
    np.testing.assert_allclose(bounds.t_cmp, 9.00412e-9, rtol=1e-4)
    np.testing.assert_allclose(bounds.r_eff, 4.8729e12, rtol=1e-4)
    assert bounds.bound == "memory"


def test_overlap_switch():
    spec = KernelSpec(Equation.HELMHOLTZ, 1, FactorSource.TRILINEAR_RECOMPUTE, 7)
    model = KernelModel.from_spec(spec, tensor_core=True)
    hw = resolve_profile("a100")
    serial = roofline_bounds(model, hw, overlap=False)
    overlapped = roofline_bounds(model, hw, overlap=True)
    assert overlapped.t_cmp <= serial.t_cmp
    general = model.f_ax + model.f_geo - model.matrix_unit_flops
    want = max(general / hw.peak_general, model.matrix_unit_flops / hw.peak_matrix)
    np.testing.assert_allclose(overlapped.t_cmp, want, rtol=0)


def test_compute_bound_case():
    hw = HardwareProfile("slowchip", 1.0e9, 1.0e12, 1.0e12)
    spec = KernelSpec(Equation.POISSON, 1, FactorSource.TRILINEAR_RECOMPUTE, 7)
    bounds = roofline_bounds(KernelModel.from_spec(spec), hw)
    assert bounds.bound == "compute"
    assert bounds.r_eff < bounds.r_tot  # recompute flops discounted in R_eff


def test_effective_vs_total_rate():
    spec = KernelSpec(Equation.POISSON, 1, FactorSource.TRILINEAR_RECOMPUTE, 7)
    model = KernelModel.from_spec(spec)
    bounds = roofline_bounds(model, resolve_profile("a100"))
    np.testing.assert_allclose(
        bounds.r_tot / bounds.r_eff, (model.f_ax + model.f_geo) / model.f_ax, rtol=1e-12
    )
    p_eff, p_tot = measured_performance(model.f_ax, model.f_geo, 1e-6)
    np.testing.assert_allclose(p_eff, model.f_ax * 1e6, rtol=0)
    np.testing.assert_allclose(p_tot, (model.f_ax + model.f_geo) * 1e6, rtol=0)


def test_intensity_monotone_in_order():
    vals = []
    for order in (3, 5, 7, 9):
        spec = KernelSpec(Equation.POISSON, 1, FactorSource.STORED, order)
        model = KernelModel.from_spec(spec)
        vals.append(model.intensity)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_crossing_point_reference():
    a100 = resolve_profile("a100")
    assert mbp_crossing(Equation.POISSON, 3, a100) == 18
    # one step below the crossing the intensity is still under balance
    spec17 = KernelSpec(Equation.POISSON, 3, FactorSource.STORED, 16)
    spec18 = KernelSpec(Equation.POISSON, 3, FactorSource.STORED, 17)
    bal = machine_balance(a100)
    assert KernelModel.from_spec(spec17).intensity < bal
    assert KernelModel.from_spec(spec18).intensity >= bal
    assert mbp_crossing(Equation.POISSON, 3, a100, max_n1=10) is None


def test_operational_intensity_guard():
    with pytest.raises(ValueError):
        operational_intensity(100.0, 0.0)
    with pytest.raises(ValueError):
        measured_performance(1.0, 1.0, 0.0)
