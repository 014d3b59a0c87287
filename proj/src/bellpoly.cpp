// bell polynomial templates are header-only
