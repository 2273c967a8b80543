"""R-vine copula model of ESG, market and idiosyncratic risk shares."""
__version__ = "0.1.0"
