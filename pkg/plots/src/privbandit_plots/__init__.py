"""Figure rendering for privbandit sweep result CSVs.

Pure views: these scripts never recompute metrics, they only draw what the
result tables contain.
"""

__version__ = "0.1.0"
