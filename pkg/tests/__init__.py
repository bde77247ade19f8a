"""Tests for the ICU Agent Pipeline"""
