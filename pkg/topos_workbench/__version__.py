__title__ = "topos_workbench"
__description__ = (
    "Python CLI for finite categorical logic: cribles, Heyting-valued validity, "
    "Hilbert proofs, Omega-valued sets and monad morphisms."
)
__version__ = "0.1.0"
__author__ = "topos_workbench contributors"
__license__ = "MIT"
__copyright__ = "Copyright 2026 topos_workbench contributors"
