"""Cohort selection for clinical trials from longitudinal patient notes.

Criteria are expanded into SNOMED CT code lists, criterion-relevant
sentences are pulled out of each record, and a yes/no prompt against a
language-model backend decides met / not met for every pair.
"""

__version__ = "0.1.0"
