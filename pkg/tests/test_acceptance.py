"""Acceptance suite: one test per criterion, each printing a summary line.

Run as ``pytest tests/test_acceptance.py -v -s`` (or through the CLI as
``g2deform verify-all``).  Tolerances are pinned here and in the criterion
implementations; convergence-order thresholds carry a small slack below
their nominal order to absorb the higher-order terms of second-order
schemes at finite resolution.
"""

import numpy as np
import pytest

from g2deform import gallery

CONFIG = gallery.RunConfig()


def _report(num, name, checks):
    passed = all(c.passed for c in checks)
    print(f"\nACCEPTANCE {num:>2} {name}: {'PASS' if passed else 'FAIL'}")
    for c in checks:
        mark = "ok " if c.passed else "FAIL"
        print(f"    [{mark}] {c.name} = {c.value!r} (expected {c.expected!r})")
    failed = [c for c in checks if not c.passed]
    assert not failed, f"criterion {num} failed: {[c.name for c in failed]}"


def test_criterion_01_exact_algebra():
    _report(1, "exact algebra suite", gallery.criterion_exact_algebra(CONFIG))


def test_criterion_02_decomposition():
    _report(2, "3-form decomposition and derivative operator",
            gallery.criterion_decomposition(CONFIG))


def test_criterion_03_reconstruction():
    _report(3, "normal reconstruction identity (100 random planes)",
            gallery.criterion_reconstruction(CONFIG, count=100))


def test_criterion_04_closed_torus():
    checks, _ = gallery.criterion_torus_kernel(CONFIG)
    _report(4, "closed-torus kernel, gap, index, runtime", checks)


def test_criterion_05_strip_kernels():
    checks, _ = gallery.criterion_strip_kernels(CONFIG, resolutions=(8, 16))
    _report(5, "strip kernels with the independent mode oracle", checks)


def test_criterion_06_linearization():
    _report(6, "linearization of the calibration residual (50 directions)",
            gallery.criterion_linearization(CONFIG, n_dirs=50, t=1e-5, tol=1e-6))


def test_criterion_07_weitzenbock():
    _report(7, "square identity: exact per frequency, second order in h",
            gallery.criterion_weitzenbock(CONFIG, resolutions=(8, 16, 32)))


def test_criterion_08_selfadjointness():
    _report(8, "boundary-corrected symmetry of the operator",
            gallery.criterion_selfadjoint(CONFIG, resolutions=(8, 16, 32)))


def test_criterion_09_boundary_operator():
    _report(9, "boundary operator: symmetry, trace law, spectra",
            gallery.criterion_boundary_laws(CONFIG))


def test_criterion_10_index_formula():
    _report(10, "Chern numbers, tensor relation, deformation index",
            gallery.criterion_index_formula(CONFIG))


def test_criterion_11_hodge_operator():
    checks, _ = gallery.criterion_hodge(CONFIG)
    _report(11, "Hodge pair operator and its perturbation", checks)


def test_criterion_12_integrated_positivity():
    _report(12, "integrated positivity identity on kernel elements",
            gallery.criterion_bochner(CONFIG, resolutions=(8, 16, 32)))
