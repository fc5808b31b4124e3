"""Exact engine for higher-order tangency Lie algebroids on line bundles."""
