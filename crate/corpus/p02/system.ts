vars a, r;
init a = 0 && r = 0;
next a' = a && ((r < 5 && r' = r + 1) || (r >= 5 && r' = 0));
