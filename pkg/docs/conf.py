# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys
import datetime
sys.path.insert(0, os.path.abspath(".."))

# -- Project information -----------------------------------------------------

project = 'lixbench'
thisday = datetime.date.today()
copyright = str(thisday.year) + ", lixbench developers"
author = 'lixbench developers'

def get_version(fname):
    if os.path.exists(fname):
        with open(fname, 'r') as f:
            release = f.readline().strip()
    else:
        release = 'alpha'
    return release

version = get_version('../version.txt')


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinxcontrib.apidoc',
    'sphinx_copybutton'
]

apidoc_module_dir = '../lixbench'
apidoc_output_dir = 'api'
apidoc_excluded_paths = []
apidoc_separate_modules = True

exclude_patterns = [
]


# -- Options for HTML output -------------------------------------------------

html_theme = 'furo'
