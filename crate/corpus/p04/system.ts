vars a, r;
init a = 0 && r = 1;
next (r = 0 && r' = 0 && a' = a) || (r != 0 && (r' = 0 || r' = 1) && (a' = a || a' = a + 1) && a < 2) || (r != 0 && a >= 2 && r' = r && a' = a);
