"""Ring-LWE/Ring-GSW homomorphic encryption with an encrypted dynamic controller."""

from .ring import (
    ParameterError,
    Poly,
    RingParams,
    automorphism_pt,
    inf_norm,
    monomial_shift,
    negacyclic_mul,
    negacyclic_mul_schoolbook,
    poly_add,
)
from .rlwe import (
    ErrorDist,
    RlweCt,
    SecretKey,
    ct_add,
    dec,
    dec_scaled,
    enc,
    enc_scaled,
    keygen,
    plain_mul,
    sample_error,
)
from .gsw import Gadget, RgswCt, decompose, enc_gsw, external_product, gsw_matvec
from .automorphism import AutomorphismKey, ct_automorphism, gen_autokey
from .packing import PackLayout, bit_reverse, pack, slot_project, unpack_ct, unpack_pt
from .control import (
    ConversionError,
    NominalController,
    PlantModel,
    four_tank_controller,
    four_tank_fixture,
    modal_convert,
    plant_step,
    quantize_output,
)
from .enc_controller import (
    EncControllerNaive,
    EncControllerPacked,
    Scales,
    actuate_naive,
    actuate_packed,
    coeff_trace,
    sensor_encrypt,
    sensor_encrypt_packed,
)
from .planner import (
    ErrorBudget,
    StabilityCert,
    check_feasibility,
    error_budget,
    estimate_decay,
    eta,
    q_bounds,
    sigma_mult,
)
from .sim import RunConfig, run_bench, run_simulation

__all__ = [name for name in dir() if not name.startswith("_")]
