vars a, r;
init a = 0 && r = 0;
next (a = 1 && (r' = 1 || r' = 0) && a' = 0) || (a != 1 && r' = 0 && (a' = a || a' = 1));
