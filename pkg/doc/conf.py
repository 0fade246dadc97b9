#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# Synaptic documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
from os.path import join, dirname

# The package is documented from the working tree, not from site-packages.
sys.path.insert(0, join(dirname(dirname(__file__))))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'recommonmark',
]

autodoc_member_order = 'bysource'

templates_path = ['_templates']

source_suffix = ['.rst', '.md']
source_encoding = 'utf-8'

master_doc = 'index'

project = 'Synaptic'
author = 'Synaptic developers'
copyright = '2026, ' + author

language = 'en'

exclude_patterns = ['_build']

pygments_style = 'sphinx'

todo_include_todos = False

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable', None),
    'scipy': ('https://docs.scipy.org/doc/scipy', None),
}

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'

htmlhelp_basename = 'Synaptic'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
    # The paper size ('letterpaper' or 'a4paper').
    # 'papersize': 'letterpaper',
}

latex_documents = [
    (master_doc, 'Synaptic.tex', 'Synaptic Documentation',
     '-', 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'synaptic', 'Synaptic Documentation',
     [author], 1)
]
