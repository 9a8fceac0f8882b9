def main():
    count = int(input("Enter a number: "))
    if count > 10:
        print("big")
    elif count > 5:
        print("medium")
    else:
        print("small")

main()
