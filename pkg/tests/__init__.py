"""
Test suite for rank dynamics analysis

Fast tests run by default; Monte Carlo checks at full scale are marked slow.
"""

# Test configuration
TEST_DATA_DIR = "../data"
SAMPLE_SERIES_FILE = "fcwr_excerpt.csv"
