"""crcscreen: ensemble-learning toolkit for colorectal-cancer risk screening.

Six base classifiers trained on a five-feature risk vector (FIT value, BMI,
age, diabetes flag, smoking flag), combined by majority vote, optionally
pruned by backward search, and evaluated under stratified k-fold
cross-validation.
"""

__version__ = "0.1.0"

PACKAGE_NAME = "crcscreen"
CREATED_WITH = f"{PACKAGE_NAME} {__version__}"
