"""Leading-order wave-trace singularity audit for lens spaces and flat manifolds.

Submodules:
    exactnum   exact rationals, Q(zeta_q) arithmetic, symbolic cosines
    lens       lens-space model, closed-geodesic classification, length spectrum
    morse      Morse index of closed geodesic families
    wavetrace  leading wave invariants and exact cancellation decisions
    flat       Bieberbach groups: validation, flat length spectra, cleanliness
    oracle     independent numeric verification (propagators, spectra, traces)
    cli        command-line front end
"""

__version__ = "0.1.0"
