"""Exception hierarchy for the polariton toolkit.

Two families matter to callers (and to the CLI's exit codes):

* :class:`ValidationError` — the *inputs* are unusable: ill-posed model
  parameters, undersized truncations, irrational resonance ratios, missing
  sector metadata, or a requested evolution time that violates a documented
  precondition.  The CLI maps these to exit code 2.
* :class:`NumericsError` — the inputs were fine but a numerical contract
  could not be met within budget (quadrature or integrator tolerance).  The
  CLI maps these to exit code 3.
"""

from __future__ import annotations


class DeltapolError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DeltapolError):
    """Invalid input or precondition violation (CLI exit code 2)."""


class NumericsError(DeltapolError):
    """A numerical tolerance contract could not be satisfied (CLI exit code 3)."""


class DegenerateModel(ValidationError):
    """Both couplings vanish (g_N = Omega = 0): the polariton basis is 0/0."""


class BadCutoff(ValidationError):
    """A Fock-space cutoff is too small to represent the requested state."""


class CutoffOverflow(ValidationError):
    """A creation operator would push amplitude past a mode cutoff.

    Raised instead of silently truncating: inside a conserved excitation
    sector, truncation is always a sizing bug in the caller.
    """


class NotPhotonOnly(ValidationError):
    """The requested time is not a photon-only time (residual above 1e-8)."""


class IrrationalRatio(ValidationError):
    """Omega / sqrt(Omega^2 + 4 g_N^2) is not rational with denominator <= 64."""


class SectorMissing(ValidationError):
    """The operation needs total-excitation sector metadata and none is set."""


class QuadratureFailure(NumericsError):
    """Adaptive quadrature could not reach the requested absolute error."""


class IntegratorFailure(NumericsError):
    """The time-ordered integrator failed its step-doubling convergence contract."""
